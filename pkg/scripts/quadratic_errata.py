"""Print the literal-versus-corrected tables for the quadratic payoff as markdown.

The output is what FORMULA_ERRATA.md embeds; the acceptance suite re-computes
every number and compares it against that file.

    python scripts/quadratic_errata.py > /tmp/tables.md
"""
import numpy as np

from kignorance import checks
from kignorance import closed_form as cf
from kignorance.payoffs import KIgnoranceModel, TerminalPayoff


def rows_Y():
    q = TerminalPayoff.quadratic()
    for k in checks.QUAD_K:
        m = KIgnoranceModel(k, 1.0)
        sol = checks._quadratic_solve(k, 1.0, checks.VerifySettings.nx, checks.VerifySettings.nt)
        for h in checks.QUAD_H:
            lit = float(cf.quadratic_Y_literal(m, 0.0, h))
            cor = float(cf.quadratic_Y(m, 0.0, h))
            yield k, h, lit, cor, float(cf.general_H(m, q, 0.0, h)), float(sol.value(1.0, h)), lit - cor


def rows_Z():
    for k in checks.QUAD_K:
        m = KIgnoranceModel(k, 1.0)
        sol = checks._quadratic_solve(k, 1.0, checks.VerifySettings.nx, checks.VerifySettings.nt)
        for h in checks.QUAD_H:
            lit = float(cf.quadratic_Z_literal(m, 0.0, h))
            cor = float(cf.quadratic_Z(m, 0.0, h))
            yield k, h, lit, cor, float(sol.derivative(1.0, h)), lit - cor


def rows_drift():
    sol = checks._sign_drift_solve(0.3, 1.0, checks.VerifySettings.nx, checks.VerifySettings.nt)
    for tau in (0.25, 0.5, 0.75):
        for x in (0.0, 0.7, 1.5):
            lit = float(cf.sign_drift_quadratic_literal(tau, x, 0.3, 1.0))
            cor = float(cf.sign_drift_quadratic(tau, x, 0.3))
            yield tau, x, lit, cor, float(sol.value(tau, x)), lit - cor


def table(header, rows):
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for r in rows:
        out.append("| " + " | ".join(f"{v:g}" if i < 2 else f"{v:.6f}" for i, v in enumerate(r)) + " |")
    return "\n".join(out)


def main():
    np.set_printoptions(precision=6)
    print("Y at t = 0, T = 1\n")
    print(table(["k", "h", "literal", "corrected", "quadrature", "PDE", "literal - corrected"], rows_Y()))
    print("\nZ at t = 0, T = 1\n")
    print(table(["k", "h", "literal", "corrected", "PDE", "literal - corrected"], rows_Z()))
    print("\nsign-drift quadratic, k = 0.3, T = 1 (t is time since the start)\n")
    print(table(["t", "x", "literal", "corrected", "PDE", "literal - corrected"], rows_drift()))


if __name__ == "__main__":
    main()
