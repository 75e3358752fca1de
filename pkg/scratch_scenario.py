"""Dev scratch: Scenario I n=40 full table vs expected ballpark."""
import time

from passreg import resolve_scenario, run_scenario, format_table

t0 = time.time()
cfg = resolve_scenario("I", n=40, master_seed=1)
table = run_scenario(cfg)
print(format_table(table))
print(f"elapsed: {time.time()-t0:.1f}s")
