"""Numerical parameters shared across the pipeline, with override support."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    # geometry
    tol_geom: float = 1e-9        # membership / boundary-activity threshold
    # derivatives and classification
    tol_crit: float = 1e-10       # gradient norm at Newton convergence
    tol_type: float = 1e-8        # |<df, n>| below this: boundary type undecidable
    tol_nondeg: float = 1e-8      # hessian determinant / eigenvalue floor
    tol_val: float = 1e-6         # minimal separation of critical values
    # searches
    seed_grid_density: int = 40   # interior Newton seeds per axis
    boundary_samples: int = 400   # walk samples per boundary component
    newton_max_iter: int = 50
    dedup_dist: float = 1e-6
    # vector-field construction
    r_n: float = 0.15             # model-patch radius at tangency points
    delta_c: float = 0.1          # boundary collar width
    eps_n: float = 0.2            # inward push magnitude cap
    r_excl: float = 0.05          # exclusion radius around critical points
    g_min: float = 1e-3           # collar activation floor on the tangential gradient
    cert_interior_samples: int = 10000
    cert_boundary_samples: int = 2000
    build_retries: int = 3
    # flow
    r_launch: float = 1e-4
    eps_lvl: float = 1e-3
    r_conv: float = 1e-5
    t_max: float = 1e3
    rtol: float = 1e-10
    atol: float = 1e-12
    max_steps: int = 200000
    field_stop: float = 1e-8      # field norm at trajectory convergence
    sweep_samples: int = 24       # initial launch angles around a 2d source
    theta_bisect_tol: float = 1e-10
    # genericity perturbations
    perturb_amp: float = 1e-3
    perturb_retries: int = 3
    degeneracy_tol: float = 1e-4

    def override(self, **kw) -> "Tolerances":
        return replace(self, **kw)

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, mapping: dict, base: "Tolerances | None" = None) -> "Tolerances":
        base = base or cls()
        known = set(cls.names())
        bad = set(mapping) - known
        if bad:
            raise KeyError(f"unknown tolerance names: {sorted(bad)}")
        typed = {}
        for key, val in mapping.items():
            kind = type(getattr(base, key))
            typed[key] = kind(val)
        return base.override(**typed)


DEFAULT = Tolerances()
