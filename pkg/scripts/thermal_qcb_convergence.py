"""Fock-truncated Chernoff overlap of finite-squeezing thermal-loss Choi states,
compared with the asymptotic closed form, plus the small-dn exponent scaling."""

import argparse
import math
from dataclasses import dataclass

from telebounds import discrimination as disc
from telebounds import gaussian as gs


@dataclass
class Config:
    eta: float = 0.25
    nmax: int = 30
    mus: tuple = (0.5, 1.0, 2.0, 4.0)
    pairs: tuple = ((0.5, 1.0), (1.0, 2.0), (2.0, 3.0))


def fock_qcb(eta, n0, n1, mu, nmax):
    ra, ta = gs.fock_truncate(gs.choi_approx(gs.GaussianChannelParams("thermal_loss", eta, n0), mu), nmax)
    rb, tb = gs.fock_truncate(gs.choi_approx(gs.GaussianChannelParams("thermal_loss", eta, n1), mu), nmax)
    return disc.chernoff(ra, rb)[0], max(ta, tb)


def exponent_slope(n0, dn):
    e1 = -math.log(disc.thermal_qcb(n0, n0 + dn)[0])
    e2 = -math.log(disc.thermal_qcb(n0, n0 + dn / 10)[0])
    return math.log10(e1 / e2)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=Config.eta)
    ap.add_argument("--nmax", type=int, default=Config.nmax)
    args = ap.parse_args()
    cfg = Config(eta=args.eta, nmax=args.nmax)

    print(f"eta={cfg.eta} nmax={cfg.nmax}")
    print(f"{'n0':>5} {'n1':>5} {'mu':>5} {'Q_fock':>12} {'Q_inf':>12} {'diff':>10} {'deficit':>10}")
    for n0, n1 in cfg.pairs:
        q_inf = disc.thermal_qcb(n0, n1)[0]
        for mu in cfg.mus:
            q, deficit = fock_qcb(cfg.eta, n0, n1, mu, cfg.nmax)
            print(f"{n0:5.2f} {n1:5.2f} {mu:5.1f} {q:12.8f} {q_inf:12.8f} {q - q_inf:10.2e} {deficit:10.2e}")

    print("\nlog10 exponent ratio for dn -> dn/10 (2 means dn^2 law, 1 means dn law)")
    for dn in (0.1, 0.05, 0.01):
        print(f"dn={dn:<5} nbar=1: {exponent_slope(1.0, dn):.4f}  nbar=0: {exponent_slope(0.0, dn):.4f}")


if __name__ == "__main__":
    main()
