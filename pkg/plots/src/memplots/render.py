"""Figure rendering from qmemsim results rows.

Four figure kinds: lifetime_vs_beta, barrier_vs_L, splitting_vs_L,
asymmetry. Rendering is deterministic: fixed style, fixed SVG hash salt,
no embedded timestamps, so identical inputs give identical bytes.
"""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import Row, read_results  # noqa: E402

KINDS = ("lifetime_vs_beta", "barrier_vs_L", "splitting_vs_L", "asymmetry")

matplotlib.rcParams["svg.hashsalt"] = "memplots"
matplotlib.rcParams["figure.dpi"] = 100

_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


@dataclass(frozen=True)
class PlotSpec:
    input_path: str
    kind: str
    output_path: str
    yscale: str | None = None        # default chosen per kind
    observable: str | None = None    # dynamics observable for lifetime_vs_beta

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; known: {KINDS}")
        if self.yscale not in (None, "log", "linear"):
            raise ValueError(f"yscale must be log or linear, got {self.yscale!r}")


@dataclass
class RenderSummary:
    kind: str
    output_path: str
    series: dict = field(default_factory=dict)


def _median(values: list[float]) -> float:
    return float(statistics.median(values))


def _lifetime_series(rows: list[Row], observable: str) -> dict:
    """Per (family, L): median lifetime vs beta, censored trials at t_max."""
    groups: dict[tuple[str, int], dict[float, list[float]]] = {}
    for r in rows:
        if r.kind != "dynamics" or r.observable != observable or r.beta is None:
            continue
        if r.value is None:
            continue
        groups.setdefault((r.family, r.linear_size), {}).setdefault(r.beta, []).append(r.value)
    return {
        key: sorted((beta, _median(vals)) for beta, vals in by_beta.items())
        for key, by_beta in sorted(groups.items())
    }


def _barrier_series(rows: list[Row]) -> dict:
    groups: dict[tuple[str, str], list[tuple[int, float]]] = {}
    for r in rows:
        if r.kind != "barrier" or r.value is None:
            continue
        groups.setdefault((r.family, r.observable), []).append((r.linear_size, r.value))
    return {key: sorted(pts) for key, pts in sorted(groups.items())}


def _splitting_series(rows: list[Row]) -> dict:
    groups: dict[tuple[str, float], list[tuple[int, float]]] = {}
    for r in rows:
        if r.kind != "spectrum" or r.observable != "splitting" or r.value is None:
            continue
        eps = float(r.extra.get("epsilon", 0.0))
        groups.setdefault((r.family, eps), []).append((r.linear_size, r.value))
    return {key: sorted(pts) for key, pts in sorted(groups.items())}


def _asymmetry_series(rows: list[Row]) -> dict:
    """Median lifetime and censoring rate per tracked ec observable."""
    groups: dict[tuple[str, int, str], list[Row]] = {}
    for r in rows:
        if r.kind != "dynamics" or r.value is None:
            continue
        if not (r.observable.startswith("Xbar_ec") or r.observable.startswith("Zbar_ec")):
            continue
        groups.setdefault((r.family, r.linear_size, r.observable), []).append(r)
    out = {}
    for key, group in sorted(groups.items()):
        out[key] = {
            "median": _median([r.value for r in group]),
            "censoring": sum(1 for r in group if r.censored) / len(group),
        }
    return out


def render(spec: PlotSpec) -> RenderSummary:
    rows = read_results(spec.input_path)
    summary = RenderSummary(spec.kind, spec.output_path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        if spec.kind == "lifetime_vs_beta":
            observable = spec.observable or "memory_lifetime"
            series = _lifetime_series(rows, observable)
            if not series:
                raise ValueError(f"no dynamics rows for observable {observable!r}")
            for (family, L), pts in series.items():
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o",
                        label=f"{family} L={L}")
            ax.set_xlabel("beta (1/T)")
            ax.set_ylabel(f"median {observable} (sweeps)")
            ax.set_yscale(spec.yscale or "log")
            summary.series = {f"{f} L={L}": pts for (f, L), pts in series.items()}
        elif spec.kind == "barrier_vs_L":
            series = _barrier_series(rows)
            if not series:
                raise ValueError("no barrier rows")
            for (family, obs), pts in series.items():
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s",
                        label=f"{family} {obs}")
            ax.set_xlabel("linear size L")
            ax.set_ylabel("barrier (violated checks)")
            ax.set_yscale(spec.yscale or "linear")
            summary.series = {f"{f} {o}": pts for (f, o), pts in series.items()}
        elif spec.kind == "splitting_vs_L":
            series = _splitting_series(rows)
            if not series:
                raise ValueError("no spectrum splitting rows")
            yscale = spec.yscale or "log"
            for (family, eps), pts in series.items():
                if yscale == "log":
                    pts = [p for p in pts if p[1] > 0]
                if not pts:
                    continue
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="d",
                        label=f"{family} eps={eps:g}")
            ax.set_xlabel("linear size L")
            ax.set_ylabel("ground-space splitting")
            ax.set_yscale(yscale)
            summary.series = {f"{f} eps={e:g}": pts for (f, e), pts in series.items()}
        else:  # asymmetry
            series = _asymmetry_series(rows)
            if not series:
                raise ValueError("no dynamics rows for Xbar_ec/Zbar_ec")
            labels = [f"{f} L={L}\n{obs}" for (f, L, obs) in series]
            medians = [v["median"] for v in series.values()]
            ax.bar(range(len(series)), medians, color="#4878a8")
            for i, v in enumerate(series.values()):
                if v["censoring"] > 0:
                    ax.text(i, medians[i], f"censored {v['censoring']:.0%}",
                            ha="center", va="bottom", fontsize=8)
            ax.set_xticks(range(len(series)))
            ax.set_xticklabels(labels, fontsize=8)
            ax.set_ylabel("median failure time (sweeps)")
            ax.set_yscale(spec.yscale or "linear")
            summary.series = {f"{f} L={L} {obs}": v for (f, L, obs), v in series.items()}
        if spec.kind != "asymmetry":
            ax.legend()
        fig.tight_layout()
        fig.savefig(spec.output_path, metadata=_clean_metadata(spec.output_path))
        plt.close(fig)
    return summary


def _clean_metadata(path: str) -> dict:
    # SVG embeds a creation date unless explicitly cleared; PNG gets a fixed
    # software tag. Either way the output must not depend on wall time.
    if path.endswith(".png"):
        return {"Software": "memplots"}
    return {"Date": None}
