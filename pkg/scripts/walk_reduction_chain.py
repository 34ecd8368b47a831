#!/usr/bin/env python3
"""Walk one instance through the order-derivation machinery and print every
intermediate quantity: the hypothesis member texts, the core-vs-identity
margins, the peeled and scalar bounds, and the closing limit sequence.

    python scripts/walk_reduction_chain.py --k 5 --dim 3 --seed 11
"""
import argparse
import sys

from oporder import chains, dsl
from oporder.verify import (
    ParamTemplate,
    PGrid,
    _rng,
    check_conclusion,
    check_reduction_chain,
    gen_suite_tuple,
    limit_probe,
    reduction_scalar_interior,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--p-grid", default="1,2,4")
    args = ap.parse_args()

    n = args.k // 2
    tup = gen_suite_tuple(args.k, args.dim, args.seed)
    rng = _rng(args.seed, 0, 99)
    t = (rng.uniform(0.75, 0.95),) + tuple(rng.uniform(0.05, 0.15) for _ in range(n - 1))
    template = ParamTemplate(t=t, r=t[-1] + rng.uniform(0.3, 1.2))
    grid = PGrid(values=tuple(float(v) for v in args.p_grid.split(",")))

    print(f"tuple: k={args.k} dim={args.dim} margins={[f'{m:.3f}' for m in tup.margins]}")
    print(f"template: t={tuple(round(v, 3) for v in template.t)} r={template.r:.3f}")
    print("\nhypothesis members:")
    params0 = chains.placeholder_params(args.k, t=template.t, r=template.r)
    for chain in chains.hypothesis_set(params0):
        print(f"  {dsl.pretty_print(chain)}")

    print("\nadjacent order:", [v.relation.value for v in check_conclusion(tup)])

    rep = check_reduction_chain(tup, template, grid, master_seed=args.seed)
    print(f"\npremise (first ascending member on the grid): "
          f"{'pass' if rep.premise_pass else 'FAIL'}")
    print("reduction margins per exponent sample (core, peeled, scalar):")
    for row in rep.rows:
        print(f"  p={row.p_vector}: {row.margin_core:+.3e} "
              f"{row.margin_peel:+.3e} {row.margin_scalar:+.3e} "
              f"(c={row.c_total:.4f})")
    if rep.red_flags:
        print("RED FLAGS:")
        for flag in rep.red_flags:
            print(f"  {flag}")

    limit_t = (1.0,) + template.t[1:]
    interior = reduction_scalar_interior(tup, limit_t, (1.0,) * (2 * n), n)
    probe = limit_probe(tup.matrices[0], tup.matrices[1], c=max(1.0, interior))
    print(f"\nlimit sequence (c={probe.c:.6f}):")
    for p2, value in zip(probe.p2_values, probe.sequence):
        print(f"  p2={p2:>8g}: bound {value:.8f}")
    print(f"top core eigenvalue {probe.lambda_max_core:.8f}; "
          f"order consistent: {probe.order_consistent}")
    return 0 if rep.all_hold() and not rep.red_flags else 1


if __name__ == "__main__":
    sys.exit(main())
