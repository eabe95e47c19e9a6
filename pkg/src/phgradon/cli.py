"""Experiment runner: symbolic predictions against numerical measurements.

Usage::

    phgradon <experiment> [--config FILE] [--key value]... [--out DIR]
    phgradon list [--json]

A config file holds flat ``key = value`` lines (``#`` starts a comment).
Command-line ``--key value`` pairs override the file.  With ``--out`` the run
writes ``report.json`` (deterministic for a fixed config), one
``samples_*.csv`` per sampled profile and ``timing.json``.

Exit codes: 0 when every check passes (a documented sign flip counts as a
pass), 2 when any check fails, 3 when a check is inconclusive and none fails,
4 on a configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import index_calculus as ic
from .asymptotics import (
    ExpansionModel,
    detect_presence,
    fit_expansion,
    fit_leading_exponent,
    leading_log_power,
    mellin_probe,
)
from .coefficients import (
    leading_backprojection_coefficient,
    radon_coefficient,
    weight_catalog,
    weight_from_name,
)
from .profiles import GeometricGrid, ProfileSamples
from .special_fn import SampledFunction01, beta_functional
from .transforms import (
    Backprojected,
    NormalOperator,
    PhgComponentBall,
    PhgComponentCyl,
    WeightedNormalOperator,
    b_kernel,
    boundary_profile,
    radon_batch,
)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 2, 3, 4

RADON_NOTE = (
    "Radon coefficients carry the factor 1/2 from the fibre-integral derivation; "
    "without it the u=1 disk case would predict 4 sqrt(sigma) instead of the chord length 2 sqrt(sigma)."
)
BACKPROJECTION_NOTE = (
    "Closed-form backprojection coefficients are compared twice: as tabulated, and halved "
    "(the Mellin pairing's ds = dsigma / (2 sqrt(1 - sigma)) factor). Measurements follow the halved value."
)
MELLIN_SIGN_NOTE = (
    "The Laurent leading coefficient of int rho^(z-1) rho^gamma log^l(rho) at z = -gamma is measured as "
    "(-1)^l l!; the tabulated convention (-1)^(l+1) l! differs by a global sign."
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def _parse_exponent(text: str):
    value = ic.as_exponent(text)
    if isinstance(value, Fraction):
        return value
    return complex(value)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default)
CONFIG_KEYS: dict[str, tuple[Callable[[str], object], object]] = {
    "n": (int, 2),
    "gamma": (_parse_exponent, Fraction(0)),
    "ell": (int, 0),
    "side": (int, 1),
    "weight": (str, "const"),
    "gamma_w": (_parse_exponent, Fraction(0)),
    "theta_samples": (int, 2),
    "grid_rho0": (float, 1e-2),
    "grid_ratio": (float, 0.8),
    "grid_count": (int, 40),
    "t_max": (float, 3.2),
    "tol": (float, 1e-12),
    "suite": (str, "single"),
    "seed": (int, 0),
    "exponent_atol": (float, 1e-3),
    "coefficient_rtol": (float, 1e-6),
    "backprojection_rtol": (float, 1e-4),
    "absent_atol": (float, 1e-6),
    "presence_improvement": (float, 1e3),
    "presence_significance": (float, 10.0),
    "mellin_atol": (float, 1e-6),
    "functional_atol": (float, 1e-8),
    "symmetry_atol": (float, 1e-8),
    "random_checks": (int, 200),
    "include_anchors": (_parse_bool, True),
}


def parse_config_text(text: str) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return raw


def build_config(experiment: str, raw: dict[str, str]) -> dict:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    entry = EXPERIMENTS[experiment]
    config = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    config.update(entry.defaults)
    for key, text in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        parser = CONFIG_KEYS[key][0]
        try:
            config[key] = parser(text)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    _validate(experiment, config)
    return config


def _validate(experiment: str, cfg: dict) -> None:
    entry = EXPERIMENTS[experiment]
    if cfg["suite"] not in entry.suites:
        raise ConfigError(f"suite {cfg['suite']!r} not available for {experiment}; choose from {list(entry.suites)}")
    if cfg["n"] not in (2, 3):
        raise ConfigError("n must be 2 or 3")
    if cfg["ell"] < 0:
        raise ConfigError("ell must be non-negative")
    if cfg["side"] not in (1, -1):
        raise ConfigError("side must be 1 or -1")
    if cfg["theta_samples"] < 1:
        raise ConfigError("theta_samples must be at least 1")
    if cfg["random_checks"] < 1:
        raise ConfigError("random_checks must be at least 1")
    if not 1e-13 <= cfg["tol"] <= 1e-3:
        raise ConfigError("tol must lie in [1e-13, 1e-3]")
    try:
        GeometricGrid(cfg["grid_rho0"], cfg["grid_ratio"], cfg["grid_count"])
        weight_from_name(cfg["weight"], cfg["n"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if complex(cfg["gamma_w"]).real < 0:
        raise ConfigError("gamma_w must have non-negative real part")


def _config_echo(cfg: dict) -> dict:
    out = {}
    for key, value in cfg.items():
        if isinstance(value, Fraction):
            out[key] = str(value)
        elif isinstance(value, complex):
            out[key] = str(value)
        else:
            out[key] = value
    return out


# --------------------------------------------------------------------------
# report plumbing
# --------------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [_finite(value.real), _finite(value.imag)]
    if isinstance(value, (float, np.floating)):
        return _finite(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, ic.IndexSet):
        return {"text": value.to_text(), "generators": value.to_json()}
    return str(value)


def _finite(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


class Report:
    def __init__(self, experiment: str, config: dict):
        self.experiment = experiment
        self.config = config
        self.predicted: dict = {}
        self.measured: dict = {}
        self.checks: list[dict] = []
        self.notes: list[str] = []
        self.samples: dict[str, ProfileSamples] = {}
        self.timing: dict[str, float] = {}

    def check(self, name: str, verdict: str, tolerance, measured=None, expected=None, note: str = ""):
        if verdict not in ("pass", "fail", "sign-flip", "inconclusive"):
            raise ValueError(verdict)
        entry = {"name": name, "verdict": verdict, "tolerance": tolerance, "measured": measured, "expected": expected}
        if note:
            entry["note"] = note
        self.checks.append(entry)

    def note(self, text: str):
        if text not in self.notes:
            self.notes.append(text)

    def overall(self) -> str:
        verdicts = {c["verdict"] for c in self.checks}
        if "fail" in verdicts:
            return "fail"
        if "inconclusive" in verdicts or not verdicts:
            return "inconclusive"
        return "pass"

    def exit_code(self) -> int:
        return {"pass": EXIT_PASS, "fail": EXIT_FAIL, "inconclusive": EXIT_INCONCLUSIVE}[self.overall()]

    def to_json(self) -> dict:
        counts = {v: sum(c["verdict"] == v for c in self.checks) for v in ("pass", "fail", "sign-flip", "inconclusive")}
        return _jsonable(
            {
                "experiment": self.experiment,
                "config": _config_echo(self.config),
                "predicted": self.predicted,
                "measured": self.measured,
                "checks": self.checks,
                "notes": self.notes,
                "summary": {"verdict": self.overall(), "counts": counts},
                "sample_files": sorted(f"samples_{k}.csv" for k in self.samples),
            }
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(self.dumps())
        for key, samples in sorted(self.samples.items()):
            (out_dir / f"samples_{key}.csv").write_text(samples.to_csv())
        (out_dir / "timing.json").write_text(json.dumps(_jsonable(self.timing), sort_keys=True, indent=2) + "\n")


def compare(measured: complex, expected: complex, rtol: float, allow_sign: bool = False) -> str:
    scale = max(abs(expected), 1e-300)
    if abs(measured - expected) <= rtol * scale:
        return "pass"
    if allow_sign and abs(measured + expected) <= rtol * scale:
        return "sign-flip"
    return "fail"


def _rel(measured: complex, expected: complex) -> float:
    return abs(measured - expected) / max(abs(expected), 1e-300)


def _theta_directions(n: int, count: int, seed: int) -> list[np.ndarray]:
    """Deterministic unit vectors away from the coordinate axes."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.standard_normal(n)
        out.append(v / np.linalg.norm(v))
    return out


def _grid(cfg) -> GeometricGrid:
    return GeometricGrid(cfg["grid_rho0"], cfg["grid_ratio"], cfg["grid_count"])


def _tag(*parts) -> str:
    text = "_".join(str(p) for p in parts)
    return "".join(ch if ch.isalnum() or ch in "._-" else "-" for ch in text)


def _fmt_exponent(g) -> str:
    return str(g) if isinstance(g, Fraction) else f"{complex(g):g}"


# --------------------------------------------------------------------------
# verify-radon
# --------------------------------------------------------------------------

RADON_SUITE = list(
    itertools.product((2, 3), (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(17, 10)), (0, 1), ("const", "quadratic:11"))
)


def run_radon(cfg: dict, report: Report) -> None:
    if cfg["suite"] == "acceptance":
        cases = RADON_SUITE
    else:
        cases = [(cfg["n"], cfg["gamma"], cfg["ell"], cfg["weight"])]
    report.note(RADON_NOTE)
    sigma = _grid(cfg).points()
    predicted = {}
    for n, gamma, ell, wname in cases:
        key = _tag("radon", f"n{n}", f"g{_fmt_exponent(gamma)}", f"l{ell}", wname)
        index = ic.radon_index(ic.generate([(gamma, ell)]), n)
        predicted[key] = {"index_set": index}
        weight = weight_from_name(wname, n)
        u = PhgComponentBall(weight, complex(gamma), ell)
        lead = 0.5 * (n - 1) + complex(gamma).real
        background = ExpansionModel.of([(lead + j, k) for j in (1, 2, 3) for k in range(ell + 1)])
        full = background.with_term((lead, 0))
        for k in range(1, ell + 1):
            full = full.with_term((lead, k))
        for t_i, theta in enumerate(_theta_directions(n, cfg["theta_samples"], cfg["seed"] + n)):
            name = f"{key}_t{t_i}"
            values, errors = radon_batch(u, np.sqrt(1.0 - sigma), theta, sigma=sigma, tol=cfg["tol"], return_error=True)
            samples = ProfileSamples(sigma, values, errors)
            report.samples[name] = samples
            expected = radon_coefficient(0, ell, gamma, ell, n, weight, theta, s_sign=1)
            predicted[key][f"t{t_i}"] = {"theta": theta, "leading_coefficient": expected}
            exponent = fit_leading_exponent(samples, lead, ell)
            report.check(
                f"{name}: leading exponent",
                "pass" if abs(exponent - lead) <= cfg["exponent_atol"] else "fail",
                {"abs": cfg["exponent_atol"]},
                exponent,
                lead,
            )
            power, _ = leading_log_power(
                samples,
                lead,
                background,
                max_log=ell + 1,
                improvement=cfg["presence_improvement"],
                significance=cfg["presence_significance"],
            )
            report.check(f"{name}: leading log power", "pass" if power == ell else "fail", {"exact": True}, power, ell)
            fit = fit_expansion(samples, full)
            coef = fit.coefficient((lead, ell))
            report.measured[name] = {"fit": fit.to_json(), "fitted_exponent": exponent, "log_power": power}
            report.check(
                f"{name}: leading coefficient",
                compare(coef, expected, cfg["coefficient_rtol"]),
                {"rel": cfg["coefficient_rtol"]},
                coef,
                expected,
            )
    if cfg["include_anchors"]:
        _radon_anchors(cfg, report)
    report.predicted = predicted


def _radon_anchors(cfg: dict, report: Report) -> None:
    s = np.array([-0.9, -0.6, -0.2, 0.0, 0.3, 0.6, 0.95])
    theta = np.array([0.6, 0.8])
    one = weight_from_name("const", 2)
    sigma = (1 - s) * (1 + s)
    anchors = [
        ("anchor: u = 1 on the disk gives 2 sigma^(1/2)", PhgComponentBall(one, 0.0, 0, cutoff=None), 2 * np.sqrt(sigma)),
        ("anchor: u = rho on the disk gives (4/3) sigma^(3/2)", PhgComponentBall(one, 1.0, 0, cutoff=None), 4 / 3 * sigma**1.5),
    ]
    for name, u, exact in anchors:
        vals = radon_batch(u, s, theta, tol=cfg["tol"])
        worst = float(np.max(np.abs(vals - exact) / np.abs(exact)))
        report.check(name, "pass" if worst <= 1e-10 else "fail", {"rel": 1e-10}, worst, 0.0)


# --------------------------------------------------------------------------
# verify-backprojection
# --------------------------------------------------------------------------

BACKPROJECTION_SUITES = {
    "case-a": [(2, Fraction(0), 0), (2, Fraction(0), 1), (2, Fraction(0), 2)],
    "case-bc": [(2, Fraction(-1, 2), 0), (3, Fraction(-1), 0)],
    "case-d": [(2, Fraction(1, 4), 0)],
}
BACKPROJECTION_SUITES["acceptance"] = [c for k in ("case-a", "case-bc", "case-d") for c in BACKPROJECTION_SUITES[k]]


def run_backprojection(cfg: dict, report: Report) -> None:
    if cfg["suite"] == "single":
        cases = [(cfg["n"], cfg["gamma"], cfg["ell"])]
    else:
        cases = BACKPROJECTION_SUITES[cfg["suite"]]
    report.note(BACKPROJECTION_NOTE)
    grid = _grid(cfg)
    side = cfg["side"]
    for n, gamma, ell in cases:
        wname = cfg["weight"] if cfg["suite"] == "single" else "const"
        weight = weight_from_name(wname, n)
        key = _tag("backprojection", f"n{n}", f"g{_fmt_exponent(gamma)}", f"l{ell}", wname)
        tag = ic.case_classify(gamma, ell, n)
        index = ic.backprojection_index(gamma, ell, n)
        classical = ic.backprojection_index_classical(
            ic.generate([(gamma, ell)]) if side == 1 else ic.IndexSet.empty(),
            ic.generate([(gamma, ell)]) if side == -1 else ic.IndexSet.empty(),
            n,
        )
        stated, proof = ic.backprojection_index_forms(gamma, ell, n)
        report.predicted[key] = {
            "case": str(tag),
            "index_set": index,
            "classical_estimate": classical,
            "stated_generators": [g.to_text() for g in stated],
            "proof_generators": [g.to_text() for g in proof],
        }
        if stated != proof:
            report.note(f"{key}: stated and proof generator lists differ before closure; the proof form is used")
        lead = 0.5 * (n - 1) + complex(gamma).real
        target = max(0.0, lead) if tag.case in ("B", "C") else lead
        model = ExpansionModel.from_index_set(index, cfg["t_max"])
        background = ExpansionModel.of(t for t in model.terms if abs(t[0] - target) > 1e-9)
        u = PhgComponentCyl(weight, complex(gamma), ell, side)
        op = Backprojected(u, tol=cfg["tol"])
        directions = [np.eye(n)[0]] if weight.constant is not None else _theta_directions(n, cfg["theta_samples"], cfg["seed"] + n)
        for t_i, theta_hat in enumerate(directions):
            name = f"{key}_t{t_i}"
            samples = boundary_profile(op, theta_hat, grid)
            report.samples[name] = samples
            p, b_table = leading_backprojection_coefficient(gamma, ell, n, weight, theta_hat, s_sign=side)
            b_half = 0.5 * b_table
            report.predicted[key][f"t{t_i}"] = {"theta_hat": theta_hat, "log_power": p, "coefficient_tabulated": b_table, "coefficient_halved": b_half}
            power, probe_coef = leading_log_power(
                samples,
                target,
                background,
                max_log=max(p, ell) + 1,
                improvement=cfg["presence_improvement"],
                significance=cfg["presence_significance"],
            )
            report.check(
                f"{name}: leading log power at exponent {target:g}",
                "pass" if power == p else "fail",
                {"exact": True},
                power,
                p,
                note="-1 means the power itself is absent",
            )
            measured = {"log_power": power}
            if p < 0:
                report.check(
                    f"{name}: absent term ({target:g}, 0) coefficient",
                    "pass" if abs(probe_coef) <= cfg["absent_atol"] else "fail",
                    {"abs": cfg["absent_atol"]},
                    abs(probe_coef),
                    0.0,
                )
                if ell == 0 and tag.case == "A":
                    present, coef = detect_presence(samples, background, (target, 0), improvement=cfg["presence_improvement"], significance=cfg["presence_significance"])
                    measured["probe"] = {"term": [target, 0], "present": present, "coefficient": coef}
            else:
                fit = fit_expansion(samples, model)
                coef = fit.coefficient((target, p))
                measured["fit"] = fit.to_json()
                measured["leading_coefficient"] = coef
                rtol = cfg["backprojection_rtol"]
                report.check(
                    f"{name}: leading coefficient vs tabulated closed form",
                    compare(coef, b_table, rtol, allow_sign=True),
                    {"rel": rtol, "up_to_global_sign": True},
                    coef,
                    b_table,
                    note=f"relative deviation {_rel(coef, b_table):.3e}",
                )
                report.check(
                    f"{name}: leading coefficient vs halved closed form",
                    compare(coef, b_half, rtol, allow_sign=True),
                    {"rel": rtol, "up_to_global_sign": True},
                    coef,
                    b_half,
                    note=f"relative deviation {_rel(coef, b_half):.3e}",
                )
            report.measured[name] = measured


# --------------------------------------------------------------------------
# verify-normal and verify-weighted-normal
# --------------------------------------------------------------------------


def _iterated_log_set(n: int, ell: int) -> ic.IndexSet:
    return ic.generate([((n - 1) * k, j) for k in range(ell + 1) for j in range(k + 1)])


def _same_members(a: ic.IndexSet, b: ic.IndexSet, t: float) -> bool:
    return set(a.members_below(t)) == set(b.members_below(t))


def _smooth_input(cfg: dict, n: int) -> PhgComponentBall:
    weight = weight_from_name(cfg["weight"], n)
    gamma, ell = complex(cfg["gamma"]), cfg["ell"]
    if weight.constant is not None and gamma == 0 and ell == 0:
        return PhgComponentBall(weight, 0.0, 0, cutoff=None)
    return PhgComponentBall(weight, gamma, ell)


def _absence_checks(report: Report, cfg: dict, name: str, samples: ProfileSamples, base: ExpansionModel, probes) -> None:
    for term in probes:
        present, coef = detect_presence(
            samples, base, term, improvement=cfg["presence_improvement"], significance=cfg["presence_significance"]
        )
        ok = not present and abs(coef) <= cfg["absent_atol"]
        report.check(
            f"{name}: probe ({term[0]:g}, {term[1]}) absent",
            "pass" if ok else "fail",
            {"abs": cfg["absent_atol"]},
            {"present": present, "coefficient": coef},
            {"present": False},
        )


def run_normal(cfg: dict, report: Report) -> None:
    n = cfg["n"]
    for ell in (1, 2, 3):
        produced = ic.normal_iterate(2, ell)
        expected = _iterated_log_set(2, ell)
        report.check(
            f"symbolic: normal_iterate(2, {ell}) matches the (k(n-1), j), j <= k <= {ell} set below Re 6",
            "pass" if _same_members(produced, expected, 6.0) else "fail",
            {"membership_below": 6.0},
            produced.to_text(),
            expected.to_text(),
        )
    predicted = ic.normal_iterate(n, 1)
    report.predicted["index_set"] = predicted
    if predicted.note:
        report.note(predicted.note)
    u = _smooth_input(cfg, n)
    name = _tag("normal", f"n{n}")
    samples = boundary_profile(NormalOperator(u, tol=max(cfg["tol"], 1e-11)), np.eye(n)[0], _grid(cfg))
    report.samples[name] = samples
    model = ExpansionModel.from_index_set(predicted, cfg["t_max"])
    fit = fit_expansion(samples, model)
    report.measured[name] = {"fit": fit.to_json()}
    if n % 2 == 0:
        log_term = (float(n - 1), 1)
        smooth = ExpansionModel.from_index_set(ic.generate([(0, 0)]), cfg["t_max"])
        present, coef = detect_presence(
            samples, smooth, log_term, improvement=cfg["presence_improvement"], significance=cfg["presence_significance"]
        )
        report.check(
            f"{name}: probe ({log_term[0]:g}, 1) present",
            "pass" if present else "fail",
            {"improvement": cfg["presence_improvement"], "significance": cfg["presence_significance"]},
            {"present": present, "coefficient": coef},
            {"present": True},
        )
        _absence_checks(report, cfg, name, samples, model, [(0.5, 0), (1.5, 0)])
    else:
        _absence_checks(report, cfg, name, samples, model, [(0.5, 0), (1.5, 0), (0.0, 1), (1.0, 1)])


WEIGHTED_SUITE = [(2, Fraction(0)), (2, Fraction(1, 2)), (3, Fraction(0))]


def run_weighted_normal(cfg: dict, report: Report) -> None:
    cases = WEIGHTED_SUITE if cfg["suite"] == "acceptance" else [(cfg["n"], cfg["gamma_w"])]
    smooth_set = ic.generate([(0, 0)])
    for n, gamma_w in cases:
        key = _tag("weighted-normal", f"n{n}", f"gw{_fmt_exponent(gamma_w)}")
        predicted = ic.weighted_normal_index(gamma_w, n)
        report.predicted[key] = {"index_set": predicted}
        report.check(
            f"{key}: symbolic composite is smooth",
            "pass" if predicted == smooth_set else "fail",
            {"exact": True},
            predicted.to_text(),
            smooth_set.to_text(),
        )
        u = _smooth_input(cfg, n)
        samples = boundary_profile(WeightedNormalOperator(u, complex(gamma_w), tol=max(cfg["tol"], 1e-11)), np.eye(n)[0], _grid(cfg))
        report.samples[key] = samples
        model = ExpansionModel.from_index_set(smooth_set, cfg["t_max"])
        fit = fit_expansion(samples, model)
        report.measured[key] = {"fit": fit.to_json()}
        probes = []
        for j in range(3):
            e = 0.5 * (n - 1) + j
            if abs(e - round(e)) > 1e-9:
                probes.append((e, 0))
        probes += [(float(k), 1) for k in range(3)]
        _absence_checks(report, cfg, key, samples, model, probes)


# --------------------------------------------------------------------------
# verify-mellin
# --------------------------------------------------------------------------


def _symmetric_test_function(rng):
    """f(t) = exp(a t(1-t)) (1 + b (2t-1)^2) and its (t - 1/2) f'(t)."""
    a, b = rng.uniform(-1.5, 1.5, size=2)

    def f(t):
        w = t * (1 - t)
        return np.exp(a * w) * (1 + b * (2 * t - 1) ** 2)

    def lifted(t):
        w = t * (1 - t)
        centred = 2 * t - 1
        deriv = np.exp(a * w) * (a * (1 - 2 * t) * (1 + b * centred**2) + 4 * b * centred)
        return (t - 0.5) * deriv

    return f, lifted


def run_mellin(cfg: dict, report: Report) -> None:
    report.note(MELLIN_SIGN_NOTE)
    atol = cfg["mellin_atol"]
    for gamma in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        for ell in (0, 1, 2):
            g = float(gamma)
            name = _tag("mellin", f"g{gamma}", f"l{ell}")

            def f(rho, g=g, ell=ell):
                return rho**g * np.log(rho) ** ell

            probe = mellin_probe(f, -g)
            report.measured[name] = probe.to_json()
            expected = (-1) ** ell * math.factorial(ell)
            report.check(f"{name}: pole order", "pass" if probe.est_order == ell + 1 else "fail", {"exact": True}, probe.est_order, ell + 1)
            verdict = compare(probe.est_leading, expected, atol / abs(expected), allow_sign=False)
            report.check(f"{name}: leading Laurent coefficient", verdict, {"abs": atol}, probe.est_leading, expected)
            report.check(
                f"{name}: leading coefficient vs the (-1)^(l+1) l! convention",
                compare(probe.est_leading, -expected, atol / abs(expected), allow_sign=True),
                {"abs": atol, "up_to_global_sign": True},
                probe.est_leading,
                -expected,
            )

    rng = np.random.default_rng(cfg["seed"])
    worst = 0.0
    for _ in range(50):
        f, lifted = _symmetric_test_function(rng)
        z = complex(rng.uniform(1.05, 3.0), rng.uniform(-1.0, 1.0))
        lhs = beta_functional(SampledFunction01(f), z).value
        first = beta_functional(SampledFunction01(f), z + 1).value
        second = beta_functional(SampledFunction01(lifted), z + 1).value
        worst = max(worst, abs(lhs - (2 / z) * ((2 * z + 1) * first + second)))
    report.check(
        "beta functional relation on 50 random regular inputs",
        "pass" if worst <= cfg["functional_atol"] else "fail",
        {"abs": cfg["functional_atol"]},
        worst,
        0.0,
    )

    worst = 0.0
    for n, hname in ((2, "const"), (2, "linear:1"), (3, "const"), (3, "quadratic:12")):
        h = weight_from_name(hname, n)
        theta = _theta_directions(n, 1, cfg["seed"] + 7)[0]
        for s, z in itertools.product((0.3, 0.6, 0.9), (1.5, 0.6 + 0.3j, -0.4, -1.3 + 0.2j)):
            a = b_kernel(h, s, theta, z)
            b = b_kernel(h, -s, -theta, z)
            worst = max(worst, abs(a.finite() - b.finite()) / max(1.0, abs(a.finite())))
    report.check(
        "kernel symmetry B(s, theta; z) = B(-s, -theta; z)",
        "pass" if worst <= cfg["symmetry_atol"] else "fail",
        {"rel": cfg["symmetry_atol"]},
        worst,
        0.0,
    )

    for n, hname in ((2, "const"), (3, "const"), (3, "linear:1")):
        h = weight_from_name(hname, n)
        theta = np.eye(n)[0]
        regular = [complex(x, 0.1 * (i % 3)) for i, x in enumerate(np.arange(-4.9, 0.01, 0.2)) if abs(x - round(x)) > 1e-6]
        bad = [z for z in regular if b_kernel(h, 0.9, theta, z).pole_flag]
        flagged = [k for k in range(0, -5, -1) if b_kernel(h, 0.9, theta, k).pole_flag]
        report.check(
            f"kernel pole scan n={n}, h={hname}: regular away from the non-positive integers",
            "pass" if not bad else "fail",
            {"grid": "Re z in (-5, 0], step 0.2"},
            {"poles_off_lattice": bad, "poles_on_lattice": flagged},
            {"poles_off_lattice": []},
        )


# --------------------------------------------------------------------------
# verify-index-calculus
# --------------------------------------------------------------------------


def _random_index_set(rng, max_generators: int = 3) -> ic.IndexSet:
    count = int(rng.integers(1, max_generators + 1))
    gens = []
    for _ in range(count):
        gamma = Fraction(int(rng.integers(-3, 13)), 4)
        gens.append((gamma, int(rng.integers(0, 4))))
    return ic.generate(gens)


def run_index_calculus(cfg: dict, report: Report) -> None:
    rng = np.random.default_rng(cfg["seed"])
    t = 10.0
    tally: dict[str, list[int]] = {}

    def record(category, ok):
        tally.setdefault(category, [0, 0])
        tally[category][0 if ok else 1] += 1

    kinds = ("closure", "extended-union", "monotonicity", "sharpness")
    for i in range(cfg["random_checks"]):
        kind = kinds[i % len(kinds)]
        E, F, G = (_random_index_set(rng) for _ in range(3))
        if kind == "closure":
            members = E.members_below(t)
            ok = _same_members(ic.generate(members), E, t)
            for m in members[:5]:
                ok &= ic.Index(m.gamma + 1, m.k) in E and all(ic.Index(m.gamma, k) in E for k in range(m.k + 1))
            record(kind, ok)
        elif kind == "extended-union":
            ok = _same_members(ic.extended_union(E, F), ic.extended_union(F, E), t)
            ok &= _same_members(
                ic.extended_union(ic.extended_union(E, F), G), ic.extended_union(E, ic.extended_union(F, G)), t
            )
            ok &= ic.union(E, F).issubset(ic.extended_union(E, F))
            record(kind, ok)
        elif kind == "monotonicity":
            bigger = ic.union(E, F)
            n = int(rng.integers(2, 5))
            shifted = [ic.shift(X, Fraction(3, 2)) for X in (E, bigger)]
            ok = ic.radon_index(shifted[0], n).issubset(ic.radon_index(shifted[1], n))
            ok &= ic.backprojection_index_classical(E, G, n).issubset(ic.backprojection_index_classical(bigger, G, n))
            ok &= ic.backprojection_index_classical(G, E, n).issubset(ic.backprojection_index_classical(G, bigger, n))
            record(kind, ok)
        else:
            n = 2 * int(rng.integers(1, 4))
            gamma = Fraction(int(rng.integers(0, 4)))
            ell = int(rng.integers(0, 4))
            sharp = ic.backprojection_index(gamma, ell, n)
            classical = ic.backprojection_index_classical(ic.generate([(gamma, ell)]), ic.IndexSet.empty(), n)
            record(kind, sharp < classical)
            # every case (not only A) stays inside the classical estimate
            g2 = Fraction(int(rng.integers(-3, 8)), 4)
            n2 = int(rng.integers(2, 6))
            if complex(g2).real > -1:
                wide = ic.backprojection_index_classical(ic.generate([(g2, ell)]), ic.IndexSet.empty(), n2)
                record("consistency", ic.backprojection_index(g2, ell, n2).issubset(wide))
    for category in sorted(tally):
        good, bad = tally[category]
        report.check(
            f"index calculus {category}: {good + bad} randomized checks",
            "pass" if bad == 0 else "fail",
            {"exact": True},
            {"passed": good, "failed": bad},
            {"failed": 0},
        )
    report.measured["total_randomized_checks"] = sum(sum(v) for v in tally.values())
    examples = [
        ("generate [(0,1),(0,0)] equals generate [(0,1)]", ic.generate([(0, 1), (0, 0)]) == ic.generate([(0, 1)])),
        ("extended union of smooth with itself is closure{(0,1)}", ic.extended_union(ic.generate([(0, 0)]), ic.generate([(0, 0)])) == ic.generate([(0, 1)])),
        ("backprojection index (-1/2, 0, n=2) is closure{(0,1)}", ic.backprojection_index(Fraction(-1, 2), 0, 2) == ic.generate([(0, 1)])),
        ("backprojection index (-1, 0, n=3) is closure{(0,1)}", ic.backprojection_index(-1, 0, 3) == ic.generate([(0, 1)])),
        ("normal_iterate(4, 1) is closure{(0,0),(3,1)}", ic.normal_iterate(4, 1) == ic.generate([(0, 0), (3, 1)])),
    ]
    for name, ok in examples:
        report.check(name, "pass" if ok else "fail", {"exact": True}, ok, True)


# --------------------------------------------------------------------------
# registry and entry point
# --------------------------------------------------------------------------


@dataclass
class Experiment:
    description: str
    runner: Callable[[dict, Report], None]
    suites: tuple[str, ...] = ("single",)
    defaults: dict = field(default_factory=dict)


EXPERIMENTS: dict[str, Experiment] = {}


def _register(name, description, runner, suites=("single",), defaults=None):
    EXPERIMENTS[name] = Experiment(description, runner, tuple(suites), dict(defaults or {}))


_register(
    "verify-radon",
    "Radon transform of a ball component: leading exponent, log power and coefficient in sigma",
    run_radon,
    ("single", "acceptance"),
)
_register(
    "verify-backprojection",
    "Backprojection of a cylinder component: leading singular term and its closed-form coefficient",
    run_backprojection,
    ("single", "case-a", "case-bc", "case-d", "acceptance"),
)
_register(
    "verify-normal",
    "R*R on u = 1: rho log rho present, half-integer powers absent",
    run_normal,
    defaults={"t_max": 4.2},  # the rho^k log rho tail needs one more order than the default model
)
_register(
    "verify-weighted-normal",
    "Weighted normal operator on u = 1: output fits the smooth index set",
    run_weighted_normal,
    ("single", "acceptance"),
)
_register(
    "verify-mellin",
    "Mellin pole probes, beta functional relation, kernel symmetry and pole scan",
    run_mellin,
)
_register(
    "verify-index-calculus",
    "Randomized closure, extended-union, monotonicity and sharpness checks",
    run_index_calculus,
)


def list_experiments(as_json: bool = False) -> str:
    catalog = {
        name: {
            "description": exp.description,
            "suites": list(exp.suites),
            "defaults": _config_echo(build_config(name, {})),
        }
        for name, exp in EXPERIMENTS.items()
    }
    weights = weight_catalog()
    if as_json:
        return json.dumps({"experiments": catalog, "weights": weights}, sort_keys=True, indent=2) + "\n"
    lines = [f"{name:24s} {info['description']}" for name, info in catalog.items()]
    lines.append("")
    lines.append("weights:")
    lines += [f"  {name:12s} {desc}" for name, desc in sorted(weights.items())]
    return "\n".join(lines) + "\n"


def run(experiment: str, config: dict) -> Report:
    """Run one experiment; module errors become an inconclusive check."""
    report = Report(experiment, config)
    start = time.perf_counter()
    try:
        EXPERIMENTS[experiment].runner(config, report)
    except Exception as exc:  # captured into the report by design
        report.check("run", "inconclusive", None, f"{type(exc).__name__}: {exc}", None)
        report.timing["traceback"] = traceback.format_exc()
    report.timing["total_seconds"] = time.perf_counter() - start
    return report


def _split_overrides(tokens: list[str]) -> dict[str, str]:
    raw: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            value = tokens[i + 1]
            i += 2
        raw[key.replace("-", "_")] = value
    return raw


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="phgradon", description=__doc__.split("\n\n")[0])
    parser.add_argument("experiment", help="experiment name, or 'list'")
    parser.add_argument("--config", type=Path, help="flat key = value config file")
    parser.add_argument("--out", type=Path, help="directory for report.json, samples_*.csv and timing.json")
    parser.add_argument("--json", action="store_true", help="with 'list': machine-readable catalog")
    args, rest = parser.parse_known_args(argv)

    if args.experiment == "list":
        if rest:
            print(f"error: unexpected arguments {rest}", file=sys.stderr)
            return EXIT_CONFIG
        sys.stdout.write(list_experiments(args.json))
        return EXIT_PASS

    try:
        raw = parse_config_text(args.config.read_text()) if args.config else {}
        raw.update(_split_overrides(rest))
        config = build_config(args.experiment, raw)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = run(args.experiment, config)
    for check in report.checks:
        print(f"{check['verdict'].upper():12s} {check['name']}")
    print(f"overall: {report.overall()}")
    if args.out:
        report.write(args.out)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
