"""Anatomy of one default cascade.

Builds a small random interbank network, gives every bank a balance sheet,
draws one round of asset returns and watches the defaults spread. Run it a
few times with different seeds to see quiet draws, partial cascades and
system-wide wipeouts.
"""
import numpy as np

import bankcascades as bc

SEED = 42
N = 60

net = bc.generate_er(N, 3.0, bc.LoanSizeDistribution.constant(1.0), SEED)
print(f"network: {N} banks, {net.n_edges} loans, mean out-degree {net.n_edges / N:.2f}")

params = bc.BalanceParams(capital_ratio=0.1, default_prob=0.01,
                          theta_dist=bc.ThetaDistribution.constant(0.3))
sheets = bc.build_sheets(net, params, rng_seed=SEED)
print(f"bank 0 sheet: external {sheets[0].external_assets:.2f}, "
      f"interbank {sheets[0].interbank_assets:.2f}, net worth {sheets[0].net_worth:.3f}, "
      f"return std {sheets[0].return_std:.4f}")

# a 1% fundamental default probability means quiet draws are common at
# N=60, so exaggerate the volatility for the demonstration
shocks = bc.ShockDraw(3.0 * bc.draw_shocks(sheets, SEED).asset_returns)
result = bc.run_balance_cascade(net, sheets, shocks)

print(f"\nfundamental defaults (own losses only): {result.n_fundamental}")
print(f"total defaults after contagion:          {result.n_total}  "
      f"({result.fraction:.0%} of the system)")
print(f"propagation rounds:                      {result.rounds}")

hit = np.flatnonzero(result.defaulted)
fundamental = shocks.asset_returns < -sheets.net_worth
for i in hit[:12]:
    kind = "fundamental" if fundamental[i] else "contagion"
    out_deg, in_deg, lent, borrowed = bc.degrees(net, int(i))
    print(f"  bank {i:3d} [{kind:11s}] lent {lent:4.1f} to {out_deg} banks, "
          f"borrowed {borrowed:4.1f}")
if len(hit) > 12:
    print(f"  ... and {len(hit) - 12} more")
