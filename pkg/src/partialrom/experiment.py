"""Reproduction harness: configured runs, curve records, CSV and manifest output.

A run builds one world (thermal or synthetic), draws posterior clouds for
``reps`` repetitions with per-repetition derived streams, reduces every cloud
greedily, and records worst-case error curves for each method against the
target manifold (``target=M``), the posterior cloud (``target=Mpost``), and
reference curves (``target=bound``).  Methods:

* ``perf``        greedy on the target manifold itself (the benchmark),
* ``point``       greedy on the point-estimate manifold,
* ``post_single`` greedy on a posterior cloud under the single-ellipsoid prior,
* ``post_multi``  greedy on a posterior cloud under the intersection prior,
* ``prior_*``     what prior knowledge alone achieves at each dimension,
* ``bound_*``     the two width-bound sequences.

Identical configurations (including seeds) produce byte-identical CSVs; a
manifest JSON embeds the full configuration so any run can be repeated from
its output directory alone.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bases import SuitableBases, compute_suitable_bases
from .bounds import (
    empirical_width,
    format_extended,
    posterior_width_bounds,
)
from .errors import ConfigError
from .estimate import estimate_manifold
from .geometry import PriorManifold, SnapshotSet, Subspace, prefix_widths
from .greedy import GreedyResult, StoppingRule, greedy
from .rng import derived_rng
from .sampling import PiDistribution, sample_posterior
from .thermal import ThermalBlockModel
from .worlds import (
    build_synthetic_world,
    build_thermal_world,
    random_subspace,
)

CSV_HEADER = "method,rep,i,target,value"


@dataclass
class RunConfig:
    """Flat, fully serializable description of one harness run."""

    setup: int = 2
    seed: int = 1234
    reps: int = 5
    i_max: int = 40
    per_point: int = 5
    pi: str = "mixture"
    d_box: float = 10.0
    m: int = 25
    n: int = 25
    n_factors: int = 1
    j_star: int = 0            # 0 = last factor
    max_draw_factor: int = 100
    k_intrinsic: int = 0       # 0 = setup default (4 thermal, k_hat synthetic)
    jobs: int = 0              # 0 = auto
    # thermal world
    cells: int = 24
    theta_min: float = 0.1
    theta_step: float = 0.1
    t_steps: int = 20
    relax_max: int = 4096
    flux: float = 1.0
    # synthetic world
    ambient: int = 200
    n_max: int = 50
    k_hat: int = 5
    delta: float = 1e-4
    eps_main: float = 1.0
    eps_perturb: float = 1e-3
    n_points: int = 150

    def validate(self) -> None:
        if self.setup not in (1, 2):
            raise ConfigError(f"setup must be 1 or 2, got {self.setup}")
        for name in ("reps", "i_max", "per_point", "m", "n", "n_factors", "max_draw_factor"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.pi not in ("uniform", "uniform-beta", "mixture"):
            raise ConfigError(f"pi must be 'uniform', 'uniform-beta' or 'mixture', got {self.pi!r}")
        if self.d_box < 0:
            raise ConfigError(f"d_box must be >= 0, got {self.d_box}")
        if self.n_factors > self.n:
            raise ConfigError(f"n_factors = {self.n_factors} exceeds n = {self.n}")
        if self.j_star and not 1 <= self.j_star <= self.n_factors:
            raise ConfigError(f"j_star must be 0 or in [1, {self.n_factors}], got {self.j_star}")
        if self.k_intrinsic < 0 or self.jobs < 0:
            raise ConfigError("k_intrinsic and jobs must be >= 0")
        if self.setup == 1:
            if self.cells < 2 or self.cells % 2:
                raise ConfigError(f"cells must be an even integer >= 2, got {self.cells}")
            if self.t_steps < 1 or self.theta_min <= 0 or self.theta_step <= 0:
                raise ConfigError("t_steps must be >= 1 and theta grid values positive")
            if self.relax_max < 16:
                raise ConfigError(f"relax_max must be >= 16, got {self.relax_max}")
        else:
            if 2 * self.n_max > self.ambient:
                raise ConfigError(
                    f"need 2 n_max <= ambient, got {2 * self.n_max} > {self.ambient}"
                )
            if not 0.0 < self.delta < 1.0:
                raise ConfigError(f"delta must lie strictly in (0, 1), got {self.delta}")
            if not 1 <= self.k_hat <= self.n_max:
                raise ConfigError(f"k_hat must be in [1, {self.n_max}], got {self.k_hat}")
            if self.eps_main <= 0 or self.eps_perturb <= 0 or self.n_points < 1:
                raise ConfigError("eps_main, eps_perturb must be > 0 and n_points >= 1")
            if self.m > self.n_max or self.n > self.n_max:
                raise ConfigError(f"m and n must not exceed n_max = {self.n_max}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: f.type for f in dataclasses.fields(cls)}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for f in dataclasses.fields(cls):
            if f.name not in data:
                continue
            raw = data[f.name]
            try:
                if f.type in ("int", int):
                    coerced[f.name] = int(raw)
                elif f.type in ("float", float):
                    coerced[f.name] = float(raw)
                else:
                    coerced[f.name] = str(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {f.name}: {raw!r}") from exc
        return cls(**coerced)

    @classmethod
    def from_config_file(cls, path: str | Path, overrides: dict | None = None) -> "RunConfig":
        """Parse a flat ``key = value`` text file; later CLI overrides win."""
        data: dict = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in stripped.split("=", 1))
            data[key] = value
        if overrides:
            data.update(overrides)
        return cls.from_dict(data)

    @classmethod
    def from_manifest(cls, path: str | Path) -> "RunConfig":
        manifest = json.loads(Path(path).read_text())
        if "config" not in manifest:
            raise ConfigError(f"{path} has no 'config' section")
        return cls.from_dict(manifest["config"])


def thermal_defaults(**overrides) -> RunConfig:
    base = dict(setup=1, m=25, n=25, i_max=40, cells=24, t_steps=20)
    base.update(overrides)
    return RunConfig(**base)


def synthetic_defaults(**overrides) -> RunConfig:
    base = dict(setup=2, m=25, n=25, i_max=40)
    base.update(overrides)
    return RunConfig(**base)


@dataclass(frozen=True)
class CurveRecord:
    method: str
    rep: int
    i: int
    target: str  # M | Mpost | bound
    value: float

    def to_csv_row(self) -> str:
        return f"{self.method},{self.rep},{self.i},{self.target},{format_extended(self.value)}"


@dataclass
class WorldBundle:
    """Common view of either world consumed by the run loop."""

    name: str
    m_cloud: SnapshotSet
    w_subspace: Subspace
    prior_single: PriorManifold
    prior_multi: PriorManifold | None
    prior_width_by_dim: np.ndarray  # empirical widths of the prior source cloud, dims 0..n
    t_subspace: Subspace
    eps_intrinsic: float
    bases_single: SuitableBases


def _derived_seed(master: int, *path: int) -> int:
    return int(np.random.SeedSequence(entropy=master, spawn_key=path).generate_state(1, np.uint64)[0])


def nested_width_curve_from_greedy(
    gr: GreedyResult, cloud: SnapshotSet, i_max: int
) -> list[float]:
    """Width of ``cloud`` over each nested greedy space, dims 0..i_max.

    Exploits that nested greedy bases share prefixes, so one coordinate matrix
    serves every dimension.  Beyond the terminal dimension the value is held.
    """
    sq_norms = np.einsum("ij,ij->i", cloud.vectors, cloud.vectors)
    curve = [float(np.sqrt(sq_norms.max()))]
    d = min(gr.terminal_dim, i_max)
    if d:
        per_dim = prefix_widths(cloud.vectors, gr.subspace(d).basis)
        curve.extend(float(x) for x in per_dim)
    while len(curve) <= i_max:
        curve.append(curve[-1])
    return curve


def _build_bundle(cfg: RunConfig) -> WorldBundle:
    if cfg.setup == 1:
        model = ThermalBlockModel(cfg.cells)
        world = build_thermal_world(
            model,
            theta_min=cfg.theta_min,
            theta_step=cfg.theta_step,
            t_steps=cfg.t_steps,
            relax_max=cfg.relax_max,
            n_prior=cfg.n,
            flux=cfg.flux,
        )
        n_dim = world.n_prior
        prior_single = world.prior_manifold(1)
        prior_multi = world.prior_manifold(cfg.n_factors) if cfg.n_factors > 1 else None
        w_sub = random_subspace(model.ambient_dim, cfg.m, derived_rng(cfg.seed, 11))
        widths = np.empty(n_dim + 1)
        widths[0] = float(np.linalg.norm(world.relax_cloud.vectors, axis=1).max())
        widths[1:] = world.greedy_prior.error_curve[:n_dim]
        v_single = prior_single.ellipsoids[0].subspace
        k = cfg.k_intrinsic or 4
        proj = (world.m_cloud.vectors @ v_single.basis) @ v_single.basis.T
        t_gr = greedy(SnapshotSet(proj), StoppingRule(max_dim=k))
        t_sub = t_gr.subspace(t_gr.terminal_dim)
        name = "thermal"
        m_cloud = world.m_cloud
    else:
        world = build_synthetic_world(
            ambient_dim=cfg.ambient,
            n_max=cfg.n_max,
            k_hat=cfg.k_hat,
            delta=cfg.delta,
            eps_main=cfg.eps_main,
            eps_perturb=cfg.eps_perturb,
            n_points=cfg.n_points,
            seed=cfg.seed,
        )
        prior_single = world.prior_manifold(cfg.n, 1)
        prior_multi = world.prior_manifold(cfg.n, cfg.n_factors) if cfg.n_factors > 1 else None
        w_sub = world.observation_subspace(cfg.m)
        nested = world.nested_width_curve(cfg.n)
        widths = np.empty(cfg.n + 1)
        widths[0] = float(np.linalg.norm(world.cloud.vectors, axis=1).max())
        widths[1:] = nested
        k = cfg.k_intrinsic or cfg.k_hat
        t_sub = Subspace(world.v_tilde[:, :k])
        name = "synthetic"
        m_cloud = world.cloud

    eps_intrinsic = empirical_width(m_cloud, t_sub)
    bases = compute_suitable_bases(prior_single.ellipsoids[0].subspace, w_sub)
    return WorldBundle(
        name=name,
        m_cloud=m_cloud,
        w_subspace=w_sub,
        prior_single=prior_single,
        prior_multi=prior_multi,
        prior_width_by_dim=widths,
        t_subspace=t_sub,
        eps_intrinsic=eps_intrinsic,
        bases_single=bases,
    )


@dataclass
class ExperimentResult:
    config: RunConfig
    records: list[CurveRecord]
    manifest: dict

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "curves.csv"
        write_csv(self.records, csv_path)
        manifest_path = out / "manifest.json"
        manifest_path.write_text(json.dumps(self.manifest, indent=2, sort_keys=True) + "\n")
        return csv_path, manifest_path


def write_csv(records: list[CurveRecord], path: str | Path) -> None:
    lines = [CSV_HEADER]
    lines.extend(r.to_csv_row() for r in records)
    Path(path).write_text("\n".join(lines) + "\n")


def _curve_records(method: str, rep: int, target: str, values) -> list[CurveRecord]:
    return [CurveRecord(method, rep, i, target, float(v)) for i, v in enumerate(values)]


def _rep_worker(
    cfg: RunConfig,
    bundle: WorldBundle,
    rep: int,
    gr_perf: GreedyResult,
    gr_point: GreedyResult,
) -> tuple[list[CurveRecord], dict]:
    pi = PiDistribution.from_name(cfg.pi)
    stop = StoppingRule(max_dim=cfg.i_max)
    j_star = cfg.j_star or None
    info: dict = {}
    records: list[CurveRecord] = []

    single_cloud = sample_posterior(
        bundle.m_cloud,
        bundle.w_subspace,
        bundle.prior_single,
        cfg.per_point,
        pi_dist=pi,
        d_box=cfg.d_box,
        seed=_derived_seed(cfg.seed, 21, rep),
    )
    gr_single = greedy(single_cloud, stop)
    records += _curve_records(
        "post_single", rep, "M", nested_width_curve_from_greedy(gr_single, bundle.m_cloud, cfg.i_max)
    )
    records += _curve_records(
        "post_single", rep, "Mpost", nested_width_curve_from_greedy(gr_single, single_cloud, cfg.i_max)
    )
    # The deterministic families are judged against this repetition's cloud.
    records += _curve_records(
        "perf", rep, "Mpost", nested_width_curve_from_greedy(gr_perf, single_cloud, cfg.i_max)
    )
    records += _curve_records(
        "point", rep, "Mpost", nested_width_curve_from_greedy(gr_point, single_cloud, cfg.i_max)
    )
    info["n_posterior_single"] = len(single_cloud)

    if bundle.prior_multi is not None:
        multi_cloud = sample_posterior(
            bundle.m_cloud,
            bundle.w_subspace,
            bundle.prior_multi,
            cfg.per_point,
            pi_dist=pi,
            d_box=cfg.d_box,
            seed=_derived_seed(cfg.seed, 22, rep),
            j_star=j_star,
            max_draws_per_point=cfg.max_draw_factor * cfg.per_point,
        )
        gr_multi = greedy(multi_cloud, stop)
        records += _curve_records(
            "post_multi", rep, "M", nested_width_curve_from_greedy(gr_multi, bundle.m_cloud, cfg.i_max)
        )
        records += _curve_records(
            "post_multi", rep, "Mpost", nested_width_curve_from_greedy(gr_multi, multi_cloud, cfg.i_max)
        )
        info["n_posterior_multi"] = len(multi_cloud)

    return records, info


def run_experiment(cfg: RunConfig) -> ExperimentResult:
    cfg.validate()
    bundle = _build_bundle(cfg)
    stop = StoppingRule(max_dim=cfg.i_max)

    records: list[CurveRecord] = []
    gr_perf = greedy(bundle.m_cloud, stop)
    records += _curve_records(
        "perf", 0, "M", nested_width_curve_from_greedy(gr_perf, bundle.m_cloud, cfg.i_max)
    )
    est_cloud = estimate_manifold(
        bundle.m_cloud, bundle.w_subspace, bundle.prior_single, bundle.bases_single
    )
    gr_point = greedy(est_cloud, stop)
    records += _curve_records(
        "point", 0, "M", nested_width_curve_from_greedy(gr_point, bundle.m_cloud, cfg.i_max)
    )

    # Reference curves: prior-only widths and the two bound sequences.
    widths = bundle.prior_width_by_dim
    n_dim = len(widths) - 1
    single_vals = [widths[min(i, n_dim)] for i in range(cfg.i_max + 1)]
    records += _curve_records("prior_single", 0, "bound", single_vals)
    if bundle.prior_multi is not None:
        n_fac = bundle.prior_multi.n_factors
        multi_vals = [
            widths[0] if i == 0 else widths[min(i, n_fac - 1)] if i < n_dim else widths[n_dim]
            for i in range(cfg.i_max + 1)
        ]
        records += _curve_records("prior_multi", 0, "bound", multi_vals)

    b = bundle.bases_single
    eps_prime = bundle.prior_single.ellipsoids[0].width
    bound = posterior_width_bounds(
        k=bundle.t_subspace.dim,
        n=b.n,
        ambient_dim=b.ambient_dim,
        eps=bundle.eps_intrinsic,
        eps_prime=eps_prime,
        sigma=b.sigma,
        p=b.p,
        q=b.q,
        m=b.m,
        i_max=cfg.i_max,
    )
    records += _curve_records("bound_dbar", 0, "bound", bound.d_bar)
    records += _curve_records("bound_dbarbar", 0, "bound", bound.d_bbar)

    # Per-repetition posterior work (independent derived streams; safe to thread).
    jobs = cfg.jobs or min(4, cfg.reps)
    rep_infos: list[dict] = [{} for _ in range(cfg.reps)]
    if jobs > 1 and cfg.reps > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_rep_worker, cfg, bundle, rep, gr_perf, gr_point)
                for rep in range(cfg.reps)
            ]
            for rep, fut in enumerate(futures):
                rep_records, info = fut.result()
                records += rep_records
                rep_infos[rep] = info
    else:
        for rep in range(cfg.reps):
            rep_records, info = _rep_worker(cfg, bundle, rep, gr_perf, gr_point)
            records += rep_records
            rep_infos[rep] = info

    records.sort(key=lambda r: (r.method, r.target, r.rep, r.i))
    manifest = _build_manifest(cfg, bundle, records, rep_infos)
    return ExperimentResult(config=cfg, records=records, manifest=manifest)


def _build_manifest(
    cfg: RunConfig, bundle: WorldBundle, records: list[CurveRecord], rep_infos: list[dict]
) -> dict:
    summary: dict = {}
    by_curve: dict[tuple[str, str], dict[int, list[float]]] = {}
    for r in records:
        by_curve.setdefault((r.method, r.target), {}).setdefault(r.i, []).append(r.value)
    for (method, target), per_i in sorted(by_curve.items()):
        entry = {"i": sorted(per_i)}
        entry["min"] = [format_extended(min(per_i[i])) for i in entry["i"]]
        entry["mean"] = [
            format_extended(sum(per_i[i]) / len(per_i[i]) if all(math.isfinite(v) for v in per_i[i]) else math.inf)
            for i in entry["i"]
        ]
        entry["max"] = [format_extended(max(per_i[i])) for i in entry["i"]]
        summary.setdefault(method, {})[target] = entry
    return {
        "world": bundle.name,
        "config": cfg.to_dict(),
        "ambient_dim": bundle.m_cloud.ambient_dim,
        "n_manifold_points": len(bundle.m_cloud),
        "eps_intrinsic": format_extended(bundle.eps_intrinsic),
        "eps_prime": format_extended(bundle.prior_single.ellipsoids[0].width),
        "repetitions": rep_infos,
        "summary": summary,
    }
