"""Run the full case study and write summary + figure data.

    python3 scripts/reproduce.py [out_dir]
"""

import sys
import time

from pdregion.casestudy import reproduce, summary_table


def main(argv):
    out = argv[1] if len(argv) > 1 else "results"
    t0 = time.perf_counter()
    s = reproduce(out)
    print(summary_table(s))
    print(f"wrote {out}/ in {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main(sys.argv)
