"""Run configuration: JSON parsing and validation for the command line.

``parse_config`` validates the whole document and reports every problem it
finds (not just the first) through :class:`ConfigError`.  A chain is
described link by link; each matrix entry is a (coefficient, basis) pair
or a constant, and a list of such pairs denotes a superposition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import BASIS_KINDS, Constant, FREE_CHANNEL, Superposition, centrifugal, make_basis
from .chain import ChainSpec, TransformationMatrix, regular_link, singular_link
from .scattering import KvGParameters

__all__ = ["ConfigError", "GridSpec", "RunConfig", "parse_config"]

COMMANDS = ("potential", "solution", "smatrix", "kvg", "verify")


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class GridSpec:
    r_min: float = 0.05
    r_max: float = 20.0
    points: int = 400
    spacing: str = "linear"

    def build(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.r_min, self.r_max, self.points)
        return np.linspace(self.r_min, self.r_max, self.points)


@dataclass
class RunConfig:
    command: str
    chain: ChainSpec | None = None
    kvg: KvGParameters | None = None
    psi: list | None = None
    energy: float | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    k_values: list = field(default_factory=list)
    out_path: str | None = None
    out_format: str = "csv"
    tolerances: dict = field(default_factory=dict)
    n_chains: int = 20
    seed: int = 2024
    grid_explicit: bool = False


def _as_complex(value, errors, where) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 \
            and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    errors.append(f"{where}: expected a number or [re, im] pair, got {value!r}")
    return 0j


def _parse_term(term, channel, errors, where):
    if not isinstance(term, dict):
        errors.append(f"{where}: entry must be an object")
        return Constant(0.0)
    if "const" in term:
        return Constant(_as_complex(term["const"], errors, where))
    kind = term.get("basis")
    if kind not in BASIS_KINDS:
        errors.append(f"{where}: unknown basis kind {kind!r} (choose from {BASIS_KINDS})")
        return Constant(0.0)
    k = _as_complex(term.get("k", 0.0), errors, where)
    coeff = _as_complex(term.get("coeff", 1.0), errors, where)
    if k == 0:
        errors.append(f"{where}: wavenumber must be nonzero")
        return Constant(0.0)
    try:
        basis = make_basis(kind, k, channel)
    except ValueError as exc:
        errors.append(f"{where}: {exc}")
        return Constant(0.0)
    return Superposition([(coeff, basis)])


def _parse_entry(entry, channel, errors, where):
    if isinstance(entry, list):
        parts = [_parse_term(t, channel, errors, f"{where}[{i}]") for i, t in enumerate(entry)]
        terms = []
        for part in parts:
            if isinstance(part, Superposition):
                terms.extend(part.terms)
            else:
                terms.append((1.0, part))
        return Superposition(terms)
    return _parse_term(entry, channel, errors, where)


def _entry_spectral(entry):
    try:
        return entry.spectral_value
    except ValueError:
        return None


def _parse_channel(spec, errors, where):
    if spec == "free":
        return FREE_CHANNEL
    if isinstance(spec, str) and spec.startswith("centrifugal:"):
        try:
            return centrifugal(int(spec.split(":", 1)[1]))
        except ValueError:
            pass
    errors.append(f"{where}: channel must be 'free' or 'centrifugal:<l>', got {spec!r}")
    return FREE_CHANNEL


def _parse_link(link, n, m, v0, errors, where) -> TransformationMatrix | None:
    if not isinstance(link, dict):
        errors.append(f"{where}: link must be an object")
        return None
    kind = link.get("kind")
    if kind == "singular":
        active = link.get("active")
        if not isinstance(active, list) or not active:
            errors.append(f"{where}: singular link needs an 'active' block")
            return None
        block_m = len(active)
        if block_m >= n:
            errors.append(f"{where}: m must be < n (active block is {block_m}x{block_m} "
                          f"in an n={n} chain)")
            return None
        if block_m != m:
            errors.append(f"{where}: active block size {block_m} differs from chain m={m}")
            return None
        rows = []
        for i, row in enumerate(active):
            if not isinstance(row, list) or len(row) != block_m:
                errors.append(f"{where}: active block must be {block_m}x{block_m}")
                return None
            rows.append([_parse_entry(e, v0[i], errors, f"{where}.active[{i}][{j}]")
                         for j, e in enumerate(row)])
        lam = _link_spectral(link, rows, errors, where)
        if lam is None:
            return None
        return singular_link(rows, n, lam)
    if kind == "regular":
        entries = link.get("entries")
        if not isinstance(entries, list) or len(entries) != n \
                or any(not isinstance(row, list) or len(row) != n for row in entries):
            errors.append(f"{where}: regular link needs an n x n 'entries' grid")
            return None
        rows = [[_parse_entry(entries[i][j], v0[i], errors, f"{where}.entries[{i}][{j}]")
                 for j in range(n)] for i in range(n)]
        lam = _link_spectral(link, rows, errors, where)
        if lam is None:
            return None
        return regular_link(rows, lam)
    errors.append(f"{where}: link kind must be 'singular' or 'regular', got {kind!r}")
    return None


def _link_spectral(link, rows, errors, where):
    values = []
    for row in rows:
        for entry in row:
            lam = _entry_spectral(entry)
            if lam is not None:
                values.append(lam)
    if "lambda" in link:
        stated = _as_complex(link["lambda"], errors, where)
        for lam in values:
            if abs(lam - stated) > 1e-10 * (1 + abs(stated)):
                errors.append(f"{where}: stated lambda {stated} inconsistent with "
                              f"entry value {lam}")
                return None
        return stated
    if not values:
        errors.append(f"{where}: cannot infer a spectral value from constant entries; "
                      "state 'lambda' explicitly")
        return None
    first = values[0]
    for lam in values[1:]:
        if abs(lam - first) > 1e-10 * (1 + abs(first)):
            errors.append(f"{where}: entries mix spectral values {first} and {lam}")
            return None
    return first


def _parse_chain(doc, errors) -> ChainSpec | None:
    spec = doc.get("chain")
    if spec is None:
        return None
    if not isinstance(spec, dict):
        errors.append("chain: must be an object")
        return None
    n = spec.get("n")
    m = spec.get("m", 1)
    if not isinstance(n, int) or n < 1:
        errors.append("chain.n: need a positive integer channel count")
        return None
    if not isinstance(m, int) or not (1 <= m <= n):
        errors.append(f"chain.m: need 1 <= m <= n, got {m}")
        return None
    v0_spec = spec.get("v0", ["free"] * n)
    if not isinstance(v0_spec, list) or len(v0_spec) != n:
        errors.append("chain.v0: need one channel potential per channel")
        return None
    v0 = [_parse_channel(ch, errors, f"chain.v0[{i}]") for i, ch in enumerate(v0_spec)]
    raw_links = spec.get("links")
    if not isinstance(raw_links, list) or not raw_links:
        errors.append("chain.links: need a non-empty list of links")
        return None
    links = []
    seen_regular = False
    for idx, raw in enumerate(raw_links):
        link = _parse_link(raw, n, m, v0, errors, f"chain.links[{idx}]")
        if link is None:
            continue
        if link.kind == "regular":
            seen_regular = True
        elif seen_regular:
            errors.append(f"chain.links[{idx}]: regular link listed before a singular link")
        links.append(link)
    if errors:
        return None
    try:
        return ChainSpec(n, m, tuple(links), tuple(v0))
    except ValueError as exc:
        errors.append(f"chain: {exc}")
        return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration."""
    errors: list[str] = []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"])
    if not isinstance(doc, dict):
        raise ConfigError(["top level must be a JSON object"])

    command = doc.get("command")
    if command not in COMMANDS:
        errors.append(f"command: expected one of {COMMANDS}, got {command!r}")
        command = "verify"

    cfg = RunConfig(command=command)

    grid_doc = doc.get("grid", {})
    cfg.grid_explicit = bool(grid_doc)
    if isinstance(grid_doc, dict):
        cfg.grid = GridSpec(
            r_min=float(grid_doc.get("r_min", cfg.grid.r_min)),
            r_max=float(grid_doc.get("r_max", cfg.grid.r_max)),
            points=int(grid_doc.get("points", cfg.grid.points)),
            spacing=str(grid_doc.get("spacing", cfg.grid.spacing)),
        )
    else:
        errors.append("grid: must be an object")
    if cfg.grid.r_min <= 0 or cfg.grid.r_max <= cfg.grid.r_min:
        errors.append("grid: need 0 < r_min < r_max")
    if cfg.grid.points < 2:
        errors.append("grid: need at least 2 points")
    if cfg.grid.spacing not in ("linear", "log"):
        errors.append(f"grid.spacing: 'linear' or 'log', got {cfg.grid.spacing!r}")

    k_values = doc.get("k_values", [])
    if not isinstance(k_values, list) or not all(isinstance(k, (int, float)) for k in k_values):
        errors.append("k_values: must be a list of numbers")
    else:
        if any(k <= 0 for k in k_values):
            errors.append("k_values: wavenumbers must be positive")
        cfg.k_values = [float(k) for k in k_values]

    if any(key in doc for key in ("k1", "k2", "chi")):
        try:
            cfg.kvg = KvGParameters(float(doc.get("k1", 0.944)), float(doc.get("k2", 0.232)),
                                    float(doc.get("chi", 1.22)))
        except (TypeError, ValueError) as exc:
            errors.append(f"kvg parameters: {exc}")

    cfg.chain = _parse_chain(doc, errors)

    psi_doc = doc.get("psi")
    if psi_doc is not None:
        if cfg.chain is None:
            errors.append("psi: requires a chain")
        elif not isinstance(psi_doc, list) or len(psi_doc) != cfg.chain.n:
            errors.append("psi: need one component per channel")
        else:
            cfg.psi = [_parse_entry(comp, cfg.chain.v0[i], errors, f"psi[{i}]")
                       for i, comp in enumerate(psi_doc)]

    if "energy" in doc:
        cfg.energy = float(doc["energy"])

    out = doc.get("output", {})
    if isinstance(out, dict):
        cfg.out_path = out.get("path")
        cfg.out_format = out.get("format", "csv")
        if cfg.out_format not in ("csv", "json"):
            errors.append(f"output.format: 'csv' or 'json', got {cfg.out_format!r}")
    tol = doc.get("tolerances", {})
    if isinstance(tol, dict):
        cfg.tolerances = {str(k): float(v) for k, v in tol.items()}
    else:
        errors.append("tolerances: must be an object")
    cfg.n_chains = int(doc.get("n_chains", cfg.n_chains))
    cfg.seed = int(doc.get("seed", cfg.seed))

    # command-specific requirements
    if command == "smatrix" and not cfg.k_values:
        errors.append("smatrix: k-list required (set 'k_values')")
    if command in ("potential", "solution") and cfg.chain is None:
        errors.append(f"{command}: requires a 'chain' description")
    if command == "solution" and cfg.psi is None and cfg.chain is not None:
        errors.append("solution: requires 'psi' components")
    if command == "smatrix" and cfg.chain is None and cfg.kvg is None:
        errors.append("smatrix: needs either kvg parameters or a chain")

    if errors:
        raise ConfigError(errors)
    return cfg
