"""Quick tour of the estimate checks at reduced sizes.

Each check returns a report with a measured constant and a pass flag.
The sample counts here are small so the tour finishes in about a minute.
The acceptance suite runs the same checks at full size.  Two lines are
expected to fail: a resonant control and a truncated summability table
that has not converged at these sizes.
"""
from dkg2d.algebra import cap_pairing_bound_scan, symbol_product_scan
from dkg2d.fields import MassPair
from dkg2d.resonance import bound_ratio_scan
from dkg2d.verify import gbound, kernels


def show(rep, note=""):
    print(f"{rep.lemma:<28} constant {rep.constant:10.4g}  pass {rep.passed!s:<5} {note}")


def main():
    show(symbol_product_scan(1, -1, sample_count=20000))
    show(cap_pairing_bound_scan(6, 6, 3, 1, 1, sample_count=2000))
    show(bound_ratio_scan("non-res", MassPair(1.0, 1.0), sample_count=50000))
    show(bound_ratio_scan("non-res", MassPair(0.4, 1.0), sample_count=50000,
                          negative_control=True),
         "control: m > 2M is resonant, so the bound must fail")
    print(f"{'kernel L1 at k=j=3':<28} constant {kernels.kernel_l1(3, 3):10.4g}")
    show(gbound.summability_report("C2", 0.6, 1.0, (8, 16)),
         "still growing with the truncation size")


if __name__ == "__main__":
    main()
