"""Walk one pair of planes in A^4 through the whole pipeline.

X = V(v1, v3) and Y = V(v2, v3) meet along the line v1 = v2 = v3 = 0,
with one excess direction.  Run with `python demos/walkthrough.py`.
"""
from derived_intersect.ak import (
    atiyah_morphism,
    extract_splitting_from_formality,
    psi_theta,
    restrict_ak,
)
from derived_intersect.cycles import adapt_coordinates, excess_sequence, find_module_splitting
from derived_intersect.graded_split import euler_excess_example, find_graded_section
from derived_intersect.koszul import tor_excess_compare, tor_ranks, tor_wedge_product


def show(M):
    return [[str(a) for a in row] for row in M.entries]


def main():
    pair = adapt_coordinates([[1, 0, 0, 0], [0, 0, 1, 0]], [[0, 1, 0, 0], [0, 0, 1, 0]], 4)
    p, q, r, s = pair.blocks
    print(f"adapted blocks p={p} q={q} r={r} s={s}; excess rank {r}")

    print("generic Tor ranks:", tor_ranks(pair))
    print("Tor matches exterior powers of the excess bundle:", tor_excess_compare(pair).verdict)

    ses = excess_sequence(pair)
    w = find_module_splitting(ses)
    print("excess sequence ranks", ses.ranks, "section", show(w.section), "retraction", show(w.retraction))

    pt = psi_theta(pair, ses, w)
    print("restricted AK ranks:", restrict_ak(pair).ranks())
    print("Theta is a quasi-isomorphism:", pt.quasi_iso.verdict)

    ex = extract_splitting_from_formality(pair, pt.theta, ses)
    print("retraction read back from Theta:", show(ex.retraction), "ok:", ex.verdict)
    print("Atiyah class component:", show(atiyah_morphism(pair).dt_matrix))

    # a self-intersection has a genuine exterior algebra on Tor
    self2 = adapt_coordinates([[1, 0, 0], [0, 1, 0]], [[1, 0, 0], [0, 1, 0]], 3)
    wp = tor_wedge_product(self2, 1, 1)
    print("Tor^1 x Tor^1 -> Tor^2 on V(v1, v2):", [[[str(f) for f in c] for c in row] for row in wp.table])

    # the Euler sequence on P^1 has no graded section
    cert = find_graded_section(euler_excess_example(1))
    print("Euler sequence on P^1:", cert.to_json()["verdict"],
          f"(rank {cert.rank} < augmented rank {cert.augmented_rank})")


if __name__ == "__main__":
    main()
