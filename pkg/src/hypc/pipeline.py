"""File-level pipeline stages and the end-to-end runner.

Each stage reads and writes plain files (FD text, schema JSON, CSV), so
stages compose: chaining encode, fold, synth, load and u-intro by hand
produces byte-identical outputs to the one-shot runner.  The runner
additionally writes a manifest with content hashes and verdicts.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import DomainError, IntegrityError
from .fd import FDSet, TID, left_reduce, parse_fds
from .folding import fold
from .structures import classification_report, encode_structure, load_structure
from .synthesis import (
    Schema,
    is_3nf,
    is_bcnf,
    lossless_join,
    preserves,
    schema_from_json,
    schema_to_json,
    synthesize,
)
from .uintro import (
    build_explanation,
    correlation_fds,
    fold_correlations,
    introduce_uncertainty,
)
from .urelations import CertainRelation, URelation, WorldTable

DEFAULT_CAP_WORLDS = 10**6
DEFAULT_CAP_ATTRS = 12


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def format_fd(sigma: FDSet, f) -> str:
    lhs = " ".join(sigma.sorted_attrs(f.lhs))
    rhs = " ".join(sigma.sorted_attrs(f.rhs))
    return f"{lhs} -> {rhs}"


# -- individual stages -----------------------------------------------------------


def stage_encode(structure_path: str | Path, out_dir: str | Path) -> dict:
    """Encode a structure file into a left-reduced FD file plus a
    classification report."""
    structure_path = Path(structure_path)
    s = load_structure(structure_path)
    sigma = left_reduce(encode_structure(s))
    stem = structure_path.stem
    out_dir = Path(out_dir)
    fd_path = _write(out_dir / f"{stem}.fds", sigma.format())
    report = {"attributes": classification_report(sigma)}
    report_path = _write(
        out_dir / f"{stem}.classification.json", json.dumps(report, indent=2) + "\n"
    )
    return {"fds": fd_path, "classification": report_path, "sigma": sigma}


def stage_fold(fd_path: str | Path, out_dir: str | Path) -> dict:
    fd_path = Path(fd_path)
    sigma = parse_fds(fd_path.read_text(encoding="utf-8"))
    folded = fold(sigma).folded
    out_path = _write(Path(out_dir) / f"{fd_path.stem}.folded.fds", folded.format())
    return {"fds": out_path, "folded": folded}


def check_schema(schema: Schema, sigma: FDSet, cap_attrs: int = DEFAULT_CAP_ATTRS) -> dict:
    bcnf = is_bcnf(schema, sigma, max_attrs=cap_attrs)
    threenf = is_3nf(schema, sigma, max_attrs=cap_attrs)
    preserved = preserves(schema, sigma, max_attrs=cap_attrs)
    lossless = lossless_join(schema, sigma)
    verdicts = {
        "bcnf": bcnf.ok,
        "bcnf_witness": None
        if bcnf.ok
        else {"scheme": bcnf.scheme, "fd": format_fd(sigma, bcnf.witness)},
        "3nf": threenf.ok,
        "3nf_witness": None
        if threenf.ok
        else {"scheme": threenf.scheme, "fd": format_fd(sigma, threenf.witness)},
        "preserves": preserved,
        "lossless": lossless,
    }
    return verdicts


def stage_synth(
    fd_path: str | Path,
    out_dir: str | Path,
    force_lossless: bool = False,
    cap_attrs: int = DEFAULT_CAP_ATTRS,
) -> dict:
    fd_path = Path(fd_path)
    sigma = parse_fds(fd_path.read_text(encoding="utf-8"))
    schema = synthesize(sigma, force_lossless=force_lossless)
    verdicts = check_schema(schema, sigma, cap_attrs)
    out_dir = Path(out_dir)
    stem = fd_path.stem.removesuffix(".folded")
    schema_path = _write(out_dir / f"{stem}.schema.json", schema_to_json(schema))
    check_path = _write(
        out_dir / f"{stem}.check.json", json.dumps(verdicts, indent=2) + "\n"
    )
    return {
        "schema_path": schema_path,
        "check_path": check_path,
        "schema": schema,
        "verdicts": verdicts,
    }


@dataclass
class TrialStore:
    """Loaded, integrity-checked trial relations for one hypothesis."""

    hypothesis: str
    schema_path: Path
    relations: list[CertainRelation] = field(default_factory=list)
    sources: dict[str, Path] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def load_trials(
    schema: Schema,
    csv_paths: Sequence[str | Path],
    hypothesis: str,
    schema_path: str | Path = "",
) -> TrialStore:
    """Match each CSV against a scheme by header and enforce the
    tid-extended key."""
    store = TrialStore(str(hypothesis), Path(schema_path))
    for csv_path in csv_paths:
        csv_path = Path(csv_path)
        text = csv_path.read_text(encoding="utf-8")
        header = text.splitlines()[0].split(",") if text.strip() else []
        cols = set(header)
        if TID not in cols:
            raise DomainError(f"{csv_path.name}: missing required column {TID!r}")
        target = None
        for scheme in schema:
            if cols - {TID} == scheme.attr_set():
                target = scheme
                break
        if target is None:
            raise DomainError(
                f"{csv_path.name}: header {sorted(cols)} matches no scheme"
            )
        index = int(target.name.removeprefix("R"))
        name = f"H{store.hypothesis}_{index}"
        rel = CertainRelation.from_csv(
            name, text, key=tuple(target.key) + (TID,)
        )
        ordered = (TID,) + tuple(target.attrs)
        idx = [rel.attrs.index(a) for a in ordered]
        rel = CertainRelation(
            name, ordered, rel.key, tuple(tuple(r[i] for i in idx) for r in rel.rows)
        )
        if not rel.rows:
            store.warnings.append(f"{csv_path.name}: no data rows")
        store.relations.append(rel)
        store.sources[name] = csv_path
    return store


def stage_load(
    schema_path: str | Path,
    csv_paths: Sequence[str | Path],
    hypothesis: str,
    out_dir: str | Path,
) -> dict:
    schema_path = Path(schema_path)
    schema = schema_from_json(schema_path.read_text(encoding="utf-8"), FDSet())
    store = load_trials(schema, csv_paths, hypothesis, schema_path)
    payload = {
        "hypothesis": store.hypothesis,
        "schema": str(schema_path),
        "relations": [
            {
                "name": rel.name,
                "csv": str(store.sources[rel.name]),
                "attrs": list(rel.attrs),
                "key": list(rel.key),
                "rows": len(rel.rows),
            }
            for rel in store.relations
        ],
    }
    out_path = _write(
        Path(out_dir) / f"store_{store.hypothesis}.json",
        json.dumps(payload, indent=2) + "\n",
    )
    for warning in store.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return {"store_path": out_path, "store": store}


def load_store(store_path: str | Path) -> TrialStore:
    store_path = Path(store_path)
    payload = json.loads(store_path.read_text(encoding="utf-8"))
    store = TrialStore(str(payload["hypothesis"]), Path(payload["schema"]))
    for entry in payload["relations"]:
        rel = CertainRelation.from_csv(
            entry["name"],
            Path(entry["csv"]).read_text(encoding="utf-8"),
            key=tuple(entry["key"]),
        )
        ordered = tuple(entry["attrs"])
        idx = [rel.attrs.index(a) for a in ordered]
        store.relations.append(
            CertainRelation(
                rel.name, ordered, rel.key, tuple(tuple(r[i] for i in idx) for r in rel.rows)
            )
        )
        store.sources[entry["name"]] = Path(entry["csv"])
    return store


class UStore:
    """The uncertain side of an output directory: Y files plus the world
    table, loadable for continuation and querying."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.world = WorldTable()
        self.relations: dict[str, URelation] = {}
        world_path = self.out_dir / "W.csv"
        if world_path.exists():
            self.world = WorldTable.from_csv(world_path.read_text(encoding="utf-8"))
        for path in sorted(self.out_dir.glob("Y*.csv")):
            rel = URelation.from_csv(path.stem, path.read_text(encoding="utf-8"))
            self.relations[rel.name] = rel

    def ensure_explanation(self, h0_path: str | Path) -> URelation:
        if "Y0" in self.relations:
            return self.relations["Y0"]
        h0 = CertainRelation.from_csv(
            "H0", Path(h0_path).read_text(encoding="utf-8"), key=("phi", "upsilon")
        )
        y0 = build_explanation(h0, self.world)
        self.relations["Y0"] = y0
        return y0

    def add(self, rel: URelation):
        if rel.name in self.relations:
            raise IntegrityError(f"relation {rel.name} already produced")
        self.relations[rel.name] = rel

    def flush(self) -> list[Path]:
        written = []
        for name, rel in self.relations.items():
            written.append(_write(self.out_dir / f"{name}.csv", rel.to_csv()))
        written.append(_write(self.out_dir / "W.csv", self.world.to_csv()))
        return written


def stage_u_intro(
    store: TrialStore,
    sigma: FDSet,
    h0_path: str | Path,
    out_dir: str | Path,
) -> dict:
    """Learn correlations, factorize, and propagate for one hypothesis."""
    ustore = UStore(out_dir)
    y0 = ustore.ensure_explanation(h0_path)
    gamma = correlation_fds(store.relations, sigma)
    gamma_fold = fold_correlations(gamma)
    produced = introduce_uncertainty(
        gamma_fold, store.relations, y0, ustore.world, store.hypothesis
    )
    for rel in produced:
        ustore.add(rel)
    files = ustore.flush()
    return {
        "files": files,
        "urelations": produced,
        "world": ustore.world,
        "gamma": gamma,
        "gamma_fold": gamma_fold,
    }


# -- end-to-end runner -------------------------------------------------------------


@dataclass
class PipelineConfig:
    explanation: Path
    hypotheses: list[dict]
    base_dir: Path

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent
        hypotheses = []
        for entry in payload["hypotheses"]:
            hypotheses.append(
                {
                    "id": str(entry["id"]),
                    "structure": base / entry["structure"],
                    "trials": [base / t for t in entry.get("trials", [])],
                }
            )
        cfg = cls(base / payload["explanation"], hypotheses, base)
        missing = [
            p
            for p in [cfg.explanation]
            + [h["structure"] for h in cfg.hypotheses]
            + [t for h in cfg.hypotheses for t in h["trials"]]
            if not Path(p).exists()
        ]
        if missing:
            raise DomainError(f"missing input files: {[str(m) for m in missing]}")
        return cfg


def stage_run(
    config_path: str | Path,
    out_dir: str | Path,
    force_lossless: bool = False,
    cap_attrs: int = DEFAULT_CAP_ATTRS,
) -> dict:
    """Whole pipeline: encode, fold, synth, load and u-intro per
    hypothesis, then write the run manifest."""
    started = time.perf_counter()
    config = PipelineConfig.load(config_path)
    out_dir = Path(out_dir)
    stages: list[dict] = []
    verdicts: dict[str, dict] = {}
    produced: list[Path] = []

    for entry in config.hypotheses:
        k = entry["id"]
        t0 = time.perf_counter()
        enc = stage_encode(entry["structure"], out_dir)
        fol = stage_fold(enc["fds"], out_dir)
        syn = stage_synth(fol["fds"], out_dir, force_lossless, cap_attrs)
        produced += [enc["fds"], enc["classification"], fol["fds"]]
        produced += [syn["schema_path"], syn["check_path"]]
        verdicts[k] = dict(syn["verdicts"], schemes=len(syn["schema"]))
        stage = {
            "hypothesis": k,
            "structure": str(entry["structure"]),
            "elapsed_s": None,
        }
        if entry["trials"]:
            store = load_trials(syn["schema"], entry["trials"], k)
            for warning in store.warnings:
                print(f"warning: {warning}", file=sys.stderr)
            intro = stage_u_intro(store, enc["sigma"], config.explanation, out_dir)
            produced += intro["files"]
            stage["urelations"] = [r.name for r in intro["urelations"]]
        stage["elapsed_s"] = round(time.perf_counter() - t0, 6)
        stages.append(stage)

    files = {}
    for path in sorted(set(produced)):
        files[str(Path(path).relative_to(out_dir))] = _sha256(Path(path))
    manifest = {
        "config": str(config_path),
        "stages": stages,
        "verdicts": verdicts,
        "files": files,
        "timing": {"total_s": round(time.perf_counter() - started, 6)},
    }
    manifest_path = _write(
        out_dir / "manifest.json", json.dumps(manifest, indent=2) + "\n"
    )
    return {"manifest_path": manifest_path, "manifest": manifest, "out_dir": out_dir}
