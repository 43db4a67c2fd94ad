"""Regenerate the diversity-figure curve families as CSV files.

For every shadowing level m the SC outage, MRC outage and MRC BPSK error
probability of the three-branch preset are written next to this script
(``out/<figure>_m<m>.csv``), together with 10^6-trial Monte-Carlo bands for
one m so the analytic and simulated curves can be overlaid.

    python3 demos/figure_curves.py
"""
import io
from pathlib import Path

from kmu_shadowed.cli import parse_args, run

OUT = Path(__file__).with_name("out")
FIGURES = {"fig2": "outage-sc", "fig3": "outage-mrc", "fig4": "ber-mrc"}
M_VALUES = ("0.5", "1", "2", "5", "1e8")


def write(argv, name):
    buf = io.BytesIO()
    status = run(parse_args(argv), buf)
    if status:
        raise SystemExit(f"{name}: exit status {status}")
    (OUT / name).write_bytes(buf.getvalue())
    return buf.getvalue().decode("ascii").splitlines()


def main():
    OUT.mkdir(exist_ok=True)
    for fig, cmd in FIGURES.items():
        print(f"{fig} ({cmd}), value at 0 / 10 / 20 / 30 dB")
        for m in M_VALUES:
            rows = write([cmd, "--preset", fig, "--m", m, "--x", "0:30:31"], f"{fig}_m{m}.csv")
            vals = [rows[1 + i].split(",")[1] for i in (0, 10, 20, 30)]
            print(f"  m={m:>4}: " + "  ".join(f"{float(v):.3e}" for v in vals))
        write(["simulate", "--preset", fig, "--m", "1", "--target", cmd, "--x", "0:30:31",
               "--samples", "1000000"], f"{fig}_m1_simulated.csv")
    print(f"CSV files written to {OUT}")


if __name__ == "__main__":
    main()
