"""Experiment drivers behind the CLI: coherence table, bound suite, CFMM studies."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import cost as costmod
from . import payoff as pf
from . import permgroup, spectral
from .cost import BoundCertificate, certify


@dataclass
class MarketConfig:
    n: int = 5
    volume_cap: float = 10.0
    delta: float = 5.0
    G: dict = field(default_factory=lambda: {"kind": "power", "p": 0.5, "c": 1.0})
    samples: int = 1000
    ascent_starts: int = 10
    seed: int = 0
    zero_traders: bool = False

    def __post_init__(self):
        if self.delta <= 0 or self.volume_cap <= 0:
            raise ValueError("delta and volume cap must be positive")
        if self.n < 2:
            raise ValueError("need at least two slots")


# -- coherence table -------------------------------------------------------------------

def coherence_table(n_max: int = 7, log=None) -> list[dict]:
    if not 1 <= n_max <= spectral.SPECTRAL_CAP:
        raise permgroup.DegreeOutOfRange(f"n_max must be in 1..{spectral.SPECTRAL_CAP}")
    rows = []
    for n in range(1, n_max + 1):
        row = {"n": n}
        for kind in ("transposition", "complete"):
            s = spectral.decompose(spectral.build_graph(n, kind))
            row[f"{kind}_mu"] = spectral.coherence(s)
            row[f"{kind}_basis_dependent"] = s.is_degenerate
        lo, hi = spectral.coherence_bounds(n)
        row.update(lower_bound=lo, upper_bound=hi, complete_analytic=hi)
        rows.append(row)
        if log:
            log(f"n={n}: transposition {row['transposition_mu']:.3f}  complete {row['complete_mu']:.3f}")
    return rows


# -- CFMM studies ------------------------------------------------------------------------

def frontrun_study(cfg: MarketConfig) -> dict:
    G = pf.ForwardExchangeFn.from_dict(cfg.G)
    f = pf.frontrun_payoff(G, cfg.delta)
    bound = 8 * G.derivative_at_zero * cfg.volume_cap
    if cfg.zero_traders:
        z = pf.FrontrunList(tuple(pf.FrontrunAction() for _ in range(cfg.n - 1)) + (pf.FrontrunAction(0, cfg.delta),),
                            cfg.volume_cap, cfg.delta)
        sup = costmod.cost(f, z.actions).cost
        est = {"sup_estimate": sup, "samples": 1, "seed": cfg.seed}
    else:
        est = costmod.sampled_sup_cost(
            f, lambda rng: pf.sample_frontrun_list(rng, cfg.n, cfg.volume_cap, cfg.delta).actions,
            cfg.samples, cfg.seed,
            ascent=lambda f_, z, rng: pf.frontrun_ascent(f_, z, rng, cfg.volume_cap),
            ascent_starts=cfg.ascent_starts)
    cert = certify("global_smooth", est["sup_estimate"], bound, mode="sampled", samples=est["samples"],
                   seed=cfg.seed)
    return {"family": "frontrun", "config": asdict(cfg), "sampled_sup_cost": est["sup_estimate"],
            "bound": bound, "utilization": est["sup_estimate"] / bound, "G_prime_0": G.derivative_at_zero,
            "certificate": cert.to_dict(), "provenance": "sampled"}


def sandwich_study(cfg: MarketConfig) -> dict:
    G = pf.ForwardExchangeFn.from_dict(cfg.G)
    f = pf.sandwich_payoff()
    rng = np.random.default_rng(cfg.seed)
    sup, worst_volume_slack, min_payoff = 0.0, math.inf, math.inf
    for _ in range(cfg.samples):
        if cfg.zero_traders:
            z = _zero_sandwich(rng, cfg, G)
        else:
            z = pf.sample_sandwich_list(rng, cfg.n, cfg.volume_cap, G, cfg.delta)
        val = f(z.actions)
        sup = max(sup, costmod.cost(f, z.actions).cost)
        worst_volume_slack = min(worst_volume_slack, z.trader_volume - val)
        min_payoff = min(min_payoff, val)
    certs = [
        certify("global_smooth", sup, cfg.volume_cap, mode="sampled", side="strengthened", seed=cfg.seed),
        certify("global_smooth", sup, 2 * cfg.volume_cap, mode="sampled", side="smoothness", seed=cfg.seed),
        certify("sandwich_volume", -worst_volume_slack, 0.0, mode="sampled", seed=cfg.seed),
    ]
    return {"family": "sandwich", "config": asdict(cfg), "sampled_sup_cost": sup, "bound": cfg.volume_cap,
            "utilization": sup / cfg.volume_cap, "min_payoff": min_payoff,
            "min_volume_slack": worst_volume_slack,
            "certificates": [c.to_dict() for c in certs], "provenance": "sampled"}


def _zero_sandwich(rng, cfg: MarketConfig, G) -> pf.SandwichList:
    delta = float(cfg.delta * (1 - rng.random()))
    acts = [pf.SandwichAction(0.0, delta), *[pf.SandwichAction() for _ in range(cfg.n - 2)],
            pf.SandwichAction(0.0, -delta)]
    return pf.SandwichList(tuple(acts), cfg.volume_cap, G)


# -- bound suite -------------------------------------------------------------------------

def _random_x(rng, n: int) -> tuple:
    k = int(rng.integers(2, n + 1)) if n > 1 else 1
    alphabet = "abcdefgh"[:k]
    return tuple(str(rng.choice(list(alphabet))) for _ in range(n))


def _random_orbit_table(rng, x: tuple) -> pf.PayoffFn:
    orb = permgroup.orbit(x)
    raw = dict(zip(orb, rng.random(len(orb))))
    vals = [raw[permgroup.apply(pi, x)] for pi in permgroup.enumerate_group(len(x))]
    return pf.table_payoff(vals, x)


def _liquidation_case(n: int) -> tuple[tuple, float, float]:
    m = max(n // 2, 1)
    x = (1,) * m + (pf.LIQUIDATE,) + (-1,) * (n - m - 1)
    exact = 1 - math.factorial(m) * math.factorial(n - m - 1) / math.factorial(n)
    return x, float(m), exact


def bounds_suite(n: int, seed: int = 0, trials: int = 100, inject_fault: bool = False,
                 cfmm_samples: int = 20) -> dict:
    """Run every certificate-producing check; zero failures expected."""
    if not 2 <= n <= 6:
        raise permgroup.DegreeOutOfRange("bounds suite needs 2 <= n <= 6 for exhaustive verification")
    rng = np.random.default_rng(seed)
    records: list[dict] = []
    errors: list[str] = []

    def add(case: str, cert: BoundCertificate):
        d = cert.to_dict()
        d["case"] = case
        records.append(d)

    spectra = {k: spectral.decompose(spectral.build_graph(n, k)) for k in ("transposition", "complete")}
    N = math.factorial(n)

    # fixed fixtures
    x, p, exact = _liquidation_case(n)
    liq = pf.liquidation_payoff(p)
    add("liquidation", certify("liquidation_formula", abs(costmod.cost(liq, x).cost - exact), 0.0, 1e-12))
    add("liquidation", costmod.stabilizer_bound(liq, x))
    distinct = tuple(range(n))
    ind = pf.indicator_payoff(distinct[::-1])
    sb = costmod.stabilizer_bound(ind, distinct)
    add("indicator", sb)
    add("indicator_saturation", certify("stabilizer_saturation", abs(sb.slack), 0.0, 1e-12))
    parity = spectral.parity_eigenvector(n)
    for cert in spectral.path_bound(parity, spectra["transposition"].graph):
        add("parity", cert)
    for cert in spectral.cg_sandwich(parity, spectra["transposition"]):
        add("parity", cert)
    lin = pf.linear_tightness_payoff()
    e1 = (1.0,) + (0.0,) * (n - 1)
    add("linear_tightness", costmod.lipschitz_cost_bound(lin, 1.0, pf.l1_distance, (0.0,) * n, e1))

    for t in range(trials):
        try:
            x = _random_x(rng, n)
            f = _random_orbit_table(rng, x)
            fn, _, _ = costmod.normalize(f, x)
            add("random_table", costmod.stabilizer_bound(fn, x))
            wc = pf.global_worst_cost_payoff()
            sbw = costmod.stabilizer_bound(wc, x)
            add("worst_cost", sbw)
            add("worst_cost", certify("stabilizer_saturation", abs(sbw.slack), 0.0, 1e-12))

            vals = costmod.orbit_values(fn, x)
            levels = np.unique(vals)
            if len(levels) == 1:
                alpha, H = 1.0, set(range(len(vals)))
            else:
                alpha = float(min(np.quantile(vals, rng.uniform(0.5, 0.95)), levels[-2]))
                H = set(np.flatnonzero(vals > alpha).tolist())
            add("spiky", costmod.spiky_bound(fn, x, H, alpha, float(vals.max())))

            c = costmod.cost(fn, x).cost
            eta = float(rng.uniform(0.05, 1.0))
            T = [y for y in permgroup.orbit(x) if fn(y) >= eta]
            add("converse", costmod.converse_support_bound(fn, x, c, eta, T))

            w = rng.uniform(-1, 1, n)
            L = float(np.abs(w).max())
            lin_w = pf.PayoffFn(lambda z, w=w: float(np.dot(w, z)), {"family": "weighted_linear"})
            u, v = tuple(rng.normal(size=n)), tuple(rng.normal(size=n))
            add("lipschitz", costmod.lipschitz_cost_bound(lin_w, L, pf.l1_distance, u, v))

            signal = vals if rng.random() < 0.5 else rng.normal(size=N)
            table = pf.table_payoff(signal, distinct)
            add("cross_module", certify("signal_agreement",
                                        abs(costmod.cost(table, distinct).cost - spectral.cost_from_signal(signal)),
                                        0.0, 1e-10))
            for kind, spec in spectra.items():
                if inject_fault and t == 0 and kind == "transposition":
                    spec = spectral.Spectrum(spec.eigenvalues * 1e6, spec.eigenvectors, spec.graph,
                                             spec.multiplicities, {"corrupted": True})
                for cert in spectral.path_bound(signal, spec.graph):
                    add(kind, cert)
                for cert in spectral.fourier_bounds(signal, spec):
                    add(kind, cert)
                for cert in spectral.cg_sandwich(signal, spec):
                    add(kind, cert)
        except Exception as exc:  # reported, never swallowed
            errors.append(f"trial {t}: {type(exc).__name__}: {exc}")

    if cfmm_samples:
        G = pf.ForwardExchangeFn("power", p=0.5, c=1.0)
        fr = pf.frontrun_payoff(G, 1.0)
        zero = (pf.FrontrunAction(0.0, 1.0),) + (pf.FrontrunAction(),) * (n - 1)
        add("frontrun", costmod.global_smooth_bound(
            fr, 2 * G.derivative_at_zero, 2 * 4.0,
            lambda r: pf.sample_frontrun_list(r, n, 4.0, 1.0).actions,
            samples=cfmm_samples, seed=seed, inf_point=zero))

    failures = [r for r in records if not r["satisfied"]]
    return {"n": n, "seed": seed, "trials": trials, "certificates": len(records),
            "failures": len(failures) + len(errors), "errors": errors,
            "failed_records": failures, "records": records}
