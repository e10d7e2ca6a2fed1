"""Run the three federation scenarios side by side on one seed.

The direct-to-base-station scheme (cvfl) can only use the three devices
with fast uplinks, so it never sees the data held by the far pair and its
accuracy flattens early. The clustered schemes bring all five devices in
over device-to-device links. A small nine-sector task keeps this demo
quick; the full-size comparisons use the default data plan.
"""

from dfedsim import (
    DataPlan,
    PartitionPlan,
    ScenarioConfig,
    ScenarioKind,
    run_scenario,
    total_energy,
)

plan = DataPlan(
    partition=PartitionPlan(devices=5, samples_per_device=400, strategy="coverage"),
    test_samples=400,
    sectors=9,
    ae_epochs=10,
)

results = {}
for kind in ScenarioKind:
    config = ScenarioConfig(kind=kind, rounds=16, seed=0, data=plan, local_epochs=2)
    traces = run_scenario(config)
    results[kind] = traces
    curve = " ".join(f"{t.accuracy:.2f}" for t in traces[::3])
    print(f"{kind.value:<20} accuracy every 3rd round: {curve}")

print(f"\n{'scenario':<20} {'participants':<13} {'final_acc':>9} {'energy':>9}")
for kind, traces in results.items():
    last = traces[-1]
    print(f"{kind.value:<20} {len(last.participants):<13} "
          f"{last.accuracy:>9.3f} {total_energy(traces):>9.1f}")

print("\nboth clustered schemes end well above the direct scheme's plateau,"
      "\nand the direct scheme also spends the most energy: its excluded far"
      "\ndevices keep burning battery on a base-station link they cannot use")
