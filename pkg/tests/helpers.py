"""Shared instance builders for the test suite."""

import numpy as np

from discinterp.geometry import DiscSequence
from discinterp.growth import GrowthFunction
from discinterp.harness import generate_sequence, generate_targets

FAMILY_CYCLE = (
    GrowthFunction.power(0.5),
    GrowthFunction.power(1.0),
    GrowthFunction.power(2.0),
    GrowthFunction.log_power(2.0),
)


def lattice_instance(seed: int, gf: GrowthFunction, rings: int = 4,
                     r0: float = 0.55, q: float = 0.62, max_points: int = 60,
                     target_constant: float = 2.5):
    """A separated ring instance with random admissible targets.

    Nodes sit on rings whose boundary distances shrink geometrically, with
    jittered pseudohyperbolically quasi-equal angular gaps; targets satisfy
    ln|b_k| <= 0.9 * target_constant * psi_tilde(1/(1-|z_k|)).
    """
    seq = generate_sequence(
        {"kind": "perturbed_lattice", "rings": rings, "r0": r0, "q": q,
         "spread": 0.5, "jitter": 0.15, "max_points": max_points},
        seed,
    )
    targets = generate_targets(
        {"kind": "random_admissible", "constant": target_constant}, seq, gf, seed
    )
    return seq, targets


def small_radial_instance(gf: GrowthFunction):
    seq = DiscSequence([0.3, 0.55, -0.4 + 0.35j, 0.7j, -0.8])
    rng = np.random.default_rng(99)
    targets = generate_targets(
        {"kind": "random_admissible", "constant": 1.0}, seq, gf, 99
    )
    return seq, targets


def acceptance_instances():
    """Twenty seeded instances cycling the four growth families."""
    bank = []
    for i in range(20):
        gf = FAMILY_CYCLE[i % len(FAMILY_CYCLE)]
        rings = 3 + (i % 3)
        seq, targets = lattice_instance(
            seed=1000 + i, gf=gf, rings=rings,
            r0=0.5 + 0.02 * (i % 4), q=0.6,
            max_points=60, target_constant=1.5 + (i % 3),
        )
        bank.append((seq, gf, targets))
    return bank
