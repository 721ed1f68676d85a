"""Random divisor specs for property tests and the Zhang experiment."""
from __future__ import annotations

import random
from fractions import Fraction

from .adelic import ARCH, DivisorSpec, Place, RoofMetric
from .builders import translated_canonical
from .concave import RoofFn
from .exactnum import LogValue
from .geometry import hull, lattice_points

PRIMES = (2, 3, 5, 7)
WEIGHTS = (Fraction(1), Fraction(1, 2), Fraction(2), Fraction(3, 2))


def random_polytope(rng: random.Random, rank: int, box: int = 2, npts: int | None = None):
    """Full-dimensional lattice polytope: hull of random points in [0, box]^rank."""
    npts = npts or rank + 2
    while True:
        pts = [tuple(rng.randint(0, box) for _ in range(rank)) for _ in range(npts)]
        p = hull(pts, ambient_rank=rank)
        if p.dim == rank:
            return p


def random_places(rng: random.Random, k: int):
    """k distinct places drawn from the Archimedean place and the primes 2, 3, 5, 7."""
    pool = [ARCH] + [Place(p) for p in PRIMES]
    return sorted(rng.sample(pool, k), key=lambda v: (v.prime or 0))


def random_height(rng: random.Random, place: Place) -> LogValue:
    if place.is_archimedean:
        return LogValue.log(Fraction(rng.randint(1, 9), rng.randint(1, 9))) + Fraction(rng.randint(-2, 2), 2)
    return LogValue.log(place.prime, rng.randint(-2, 2))


def random_roof(rng: random.Random, delta, place: Place, density: float = 0.6) -> RoofFn:
    """Upper envelope of random lifts of the vertices and a random subset of lattice points."""
    verts = set(delta.vertices)
    pts = [m for m in lattice_points(delta) if m in verts or rng.random() < density]
    return RoofFn([(m, random_height(rng, place)) for m in pts], delta)


def random_spec(rng: random.Random, max_rank: int = 3, max_places: int = 4, box: int = 2) -> DivisorSpec:
    rank = rng.randint(1, max_rank)
    delta = random_polytope(rng, rank, box=box)
    spec = DivisorSpec(rank, delta, note="random semipositive")
    for place in random_places(rng, rng.randint(1, max_places)):
        spec.add(place, RoofMetric(random_roof(rng, delta, place)), rng.choice(WEIGHTS))
    return spec


def _random_coord(rng: random.Random) -> LogValue:
    return LogValue(Fraction(rng.randint(-3, 3), rng.randint(1, 2))) + LogValue.log(2, Fraction(rng.randint(-2, 2), 2))


def random_translated_canonical(rng: random.Random, max_rank: int = 3, max_places: int = 4, box: int = 2):
    """Local roofs <x, u_v> + gamma_v with sum_v n_v u_v = 0, so the global roof is constant."""
    rank = rng.randint(1, max_rank)
    delta = random_polytope(rng, rank, box=box)
    places = random_places(rng, rng.randint(2, max_places))
    weights = [rng.choice(WEIGHTS) for _ in places]
    us = [[_random_coord(rng) for _ in range(rank)] for _ in places[:-1]]
    last = []
    for k in range(rank):
        acc = LogValue()
        for w, u in zip(weights, us):
            acc = acc + w * u[k]
        last.append(acc * (-1 / weights[-1]))
    us.append(last)
    data = [(p, w, u, random_height(rng, p)) for p, w, u in zip(places, weights, us)]
    return translated_canonical(delta, data).spec


def perturb(rng: random.Random, spec: DivisorSpec) -> DivisorSpec:
    """Lower the value at one vertex of one local roof by log 2 + 1."""
    out = DivisorSpec(spec.rank, spec.polytope, note="perturbed")
    k = rng.randrange(len(spec.entries))
    for i, e in enumerate(spec.entries):
        metric = e.metric
        if i == k:
            roof = metric.roof
            gens = dict(roof.generators)
            v = rng.choice(spec.polytope.vertices)
            gens[v] = gens[v] - LogValue.log(2) - 1
            metric = RoofMetric(RoofFn(list(gens.items()), spec.polytope))
        out.add(e.place, metric, e.weight)
    return out
