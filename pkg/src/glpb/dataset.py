"""Corpus indexing, balancing and multiplication planning, and plan execution.

The pipeline stages are kept strictly separate so every run is replayable:

1. ``scan_dataset`` parses a directory tree of patient-labeled files into a
   ``DatasetIndex`` (sorted, so directory listing order never matters).
2. ``apply_fold`` splits the index patient-wise; planning only ever sees
   the training side.
3. ``plan_balancing`` / ``plan_multiplication`` decide *what* to generate.
   Every planned entry carries its own seed, derived by hashing the global
   seed with the entry's position, so plans are pure functions of the index
   contents, policy, and seed.
4. ``execute_plan`` does the pixel work and reports one manifest record per
   entry, sorted by output name regardless of worker count.

Synthetic samples are paired from images of different patients within the
same class (and, by default, the same magnification); generated images are
never used as blend sources themselves.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .blend import direct_blend, make_half_mask, mix_blend, pyramid_blend
from .errors import (
    GlpbError,
    InsufficientPatients,
    UnassignedPatient,
    UnreadableRoot,
)
from .imgio import load_image, save_image
from .pyramid import BINOMIAL_KERNEL, Image, Kernel, default_levels, reduce

__all__ = [
    "BENIGN_SUBTYPES",
    "MALIGNANT_SUBTYPES",
    "MAGNIFICATIONS",
    "SampleRecord",
    "DatasetIndex",
    "PairingPolicy",
    "PlanEntry",
    "AugmentationPlan",
    "ManifestRecord",
    "parse_sample_filename",
    "scan_dataset",
    "apply_fold",
    "load_folds",
    "fold_assignments",
    "select_pair",
    "plan_balancing",
    "plan_multiplication",
    "color_jitter",
    "execute_plan",
    "write_manifest",
    "read_manifest",
]

BENIGN_SUBTYPES = ("A", "F", "PT", "TA")
MALIGNANT_SUBTYPES = ("DC", "LC", "MC", "PC")
MAGNIFICATIONS = (40, 100, 200, 400)
CLASSES = ("benign", "malignant")

_SUBTYPE_CLASS = {s: "benign" for s in BENIGN_SUBTYPES}
_SUBTYPE_CLASS.update({s: "malignant" for s in MALIGNANT_SUBTYPES})

# SOB_<B|M>_<SUBTYPE>-<patient>-<magnification>-<sequence>.png
_FILENAME_RE = re.compile(
    r"SOB_(?P<cls>[BM])_(?P<subtype>[A-Z]{1,2})"
    r"-(?P<patient>\d{2}-\d+[A-Za-z]*)"
    r"-(?P<mag>\d+)"
    r"-(?P<seq>\d+)"
    r"\.png\Z"
)


@dataclass(frozen=True)
class SampleRecord:
    """One corpus file: who it came from and what it shows."""

    path: str
    class_label: str
    subtype: str
    patient_id: str
    magnification: int
    sequence: int

    def __post_init__(self):
        if _SUBTYPE_CLASS.get(self.subtype) != self.class_label:
            raise ValueError(
                f"subtype {self.subtype!r} is inconsistent with class {self.class_label!r}"
            )
        if self.magnification not in MAGNIFICATIONS:
            raise ValueError(f"magnification {self.magnification} not one of {MAGNIFICATIONS}")


def parse_sample_filename(name: str) -> dict:
    """Parse one filename against the corpus grammar.

    Returns the record fields (without path); raises ValueError with the
    reason when the name does not conform.
    """
    m = _FILENAME_RE.fullmatch(name)
    if m is None:
        raise ValueError(f"{name!r} does not match the filename grammar")
    cls = "benign" if m.group("cls") == "B" else "malignant"
    subtype = m.group("subtype")
    if subtype not in _SUBTYPE_CLASS:
        raise ValueError(f"{name!r}: unknown subtype {subtype!r}")
    if _SUBTYPE_CLASS[subtype] != cls:
        raise ValueError(f"{name!r}: subtype {subtype!r} conflicts with class letter {m.group('cls')!r}")
    mag = int(m.group("mag"))
    if mag not in MAGNIFICATIONS:
        raise ValueError(f"{name!r}: magnification {mag} not one of {MAGNIFICATIONS}")
    return {
        "class_label": cls,
        "subtype": subtype,
        "patient_id": m.group("patient"),
        "magnification": mag,
        "sequence": int(m.group("seq")),
    }


@dataclass(frozen=True)
class DatasetIndex:
    """Parsed corpus: records sorted by path, plus any unparseable files.

    Record order is normalized at construction so that everything planned
    downstream is independent of how the directory was listed.
    """

    records: tuple[SampleRecord, ...]
    malformed: tuple[str, ...] = ()

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.path))
        object.__setattr__(self, "records", recs)
        object.__setattr__(self, "malformed", tuple(sorted(self.malformed)))
        seen: dict[str, str] = {}
        for r in recs:
            prev = seen.setdefault(r.patient_id, r.class_label)
            if prev != r.class_label:
                raise ValueError(f"patient {r.patient_id} appears under both classes")

    def __len__(self) -> int:
        return len(self.records)

    def patients(self) -> set[str]:
        return {r.patient_id for r in self.records}

    def patients_by_class(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {c: set() for c in CLASSES}
        for r in self.records:
            out[r.class_label].add(r.patient_id)
        return out

    def magnifications(self) -> list[int]:
        return sorted({r.magnification for r in self.records})

    def records_for(self, class_label: str, magnification: int | None = None) -> list[SampleRecord]:
        return [
            r
            for r in self.records
            if r.class_label == class_label
            and (magnification is None or r.magnification == magnification)
        ]

    def records_by_patient(self) -> dict[str, list[SampleRecord]]:
        out: dict[str, list[SampleRecord]] = {}
        for r in self.records:
            out.setdefault(r.patient_id, []).append(r)
        return out

    def class_mag_counts(self) -> dict[tuple[str, int], int]:
        out: dict[tuple[str, int], int] = {}
        for r in self.records:
            key = (r.class_label, r.magnification)
            out[key] = out.get(key, 0) + 1
        return out

    def subtype_stats(self) -> dict[tuple[str, str], tuple[int, int]]:
        """(class, subtype) -> (image count, patient count)."""
        images: dict[tuple[str, str], int] = {}
        patients: dict[tuple[str, str], set[str]] = {}
        for r in self.records:
            key = (r.class_label, r.subtype)
            images[key] = images.get(key, 0) + 1
            patients.setdefault(key, set()).add(r.patient_id)
        return {k: (images[k], len(patients[k])) for k in images}


def scan_dataset(root: str | Path) -> DatasetIndex:
    """Walk a corpus tree and index every file that parses.

    Files that do not match the grammar are collected on the index rather
    than silently dropped or fatally rejected.
    """
    root = Path(root)
    if not root.is_dir():
        raise UnreadableRoot(f"{root} is not a readable directory")
    records: list[SampleRecord] = []
    malformed: list[str] = []
    try:
        paths = sorted(p for p in root.rglob("*") if p.is_file())
    except OSError as exc:
        raise UnreadableRoot(f"cannot walk {root}: {exc}") from exc
    for path in paths:
        try:
            fields = parse_sample_filename(path.name)
        except ValueError:
            malformed.append(str(path))
            continue
        records.append(SampleRecord(path=str(path), **fields))
    return DatasetIndex(tuple(records), tuple(malformed))


# ---------------------------------------------------------------------------
# Patient-wise folds
# ---------------------------------------------------------------------------


def load_folds(path: str | Path) -> dict[int, dict[str, list[str]]]:
    """Read a fold file: JSON mapping fold index -> {train: [...], test: [...]}.

    Accepts either a JSON object keyed by fold index, a bare list of folds,
    or an object with a top-level "folds" list.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "folds" in data:
        data = data["folds"]
    if isinstance(data, list):
        items = list(enumerate(data))
    elif isinstance(data, dict):
        items = [(int(k), v) for k, v in data.items()]
    else:
        raise ValueError(f"fold file {path} is neither a list nor a mapping of folds")
    folds: dict[int, dict[str, list[str]]] = {}
    for idx, fold in items:
        if not isinstance(fold, dict) or "train" not in fold or "test" not in fold:
            raise ValueError(f"fold {idx} must be an object with 'train' and 'test' lists")
        folds[idx] = {"train": list(fold["train"]), "test": list(fold["test"])}
    return folds


def fold_assignments(fold: dict[str, list[str]]) -> dict[str, str]:
    """Flatten one {train: [...], test: [...]} fold into patient -> split."""
    mapping: dict[str, str] = {}
    for split in ("train", "test"):
        for patient in fold[split]:
            if mapping.get(patient, split) != split:
                raise ValueError(f"patient {patient} listed in both train and test")
            mapping[patient] = split
    return mapping


def apply_fold(index: DatasetIndex, fold_spec: dict[str, str]) -> tuple[DatasetIndex, DatasetIndex]:
    """Partition an index by patient into (train, test).

    Every patient in the index must be assigned; anything else would let
    one patient straddle the split.
    """
    missing = sorted(index.patients() - set(fold_spec))
    if missing:
        raise UnassignedPatient(f"patients not assigned by fold: {', '.join(missing)}")
    bad = sorted({v for v in fold_spec.values()} - {"train", "test"})
    if bad:
        raise ValueError(f"fold assignments must be 'train' or 'test', got {bad}")
    train = [r for r in index.records if fold_spec[r.patient_id] == "train"]
    test = [r for r in index.records if fold_spec[r.patient_id] == "test"]
    return DatasetIndex(tuple(train)), DatasetIndex(tuple(test))


# ---------------------------------------------------------------------------
# Pairing and planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairingPolicy:
    """Constraints a blend pair must satisfy.

    Same-class and distinct-patients are the point of the whole exercise
    and cannot be switched off.  Magnification matching is on by default
    (training never mixes magnifications); subtype matching is opt-in.
    """

    same_class: bool = True
    same_magnification: bool = True
    same_subtype: bool = False
    distinct_patients: bool = True
    restrict_to_patients: frozenset[str] | None = None

    def __post_init__(self):
        if not self.same_class or not self.distinct_patients:
            raise ValueError("same_class and distinct_patients cannot be disabled")
        if self.restrict_to_patients is not None:
            object.__setattr__(self, "restrict_to_patients", frozenset(self.restrict_to_patients))

    def filter_pool(self, records: list[SampleRecord]) -> list[SampleRecord]:
        if self.restrict_to_patients is None:
            return list(records)
        return [r for r in records if r.patient_id in self.restrict_to_patients]

    def pair_valid(self, a: SampleRecord, b: SampleRecord) -> bool:
        if a.patient_id == b.patient_id:
            return False
        if a.class_label != b.class_label:
            return False
        if self.same_magnification and a.magnification != b.magnification:
            return False
        if self.same_subtype and a.subtype != b.subtype:
            return False
        return True


def select_pair(
    pool: list[SampleRecord], policy: PairingPolicy, entry_seed: int
) -> tuple[SampleRecord, SampleRecord]:
    """Draw one policy-valid ordered pair, uniform over all valid pairs.

    Deterministic for a fixed (pool order, seed).  Rejection sampling on
    the pool grid is exact-uniform and almost always instant; the dense
    enumeration fallback covers pathologically constrained pools.
    """
    pool = policy.filter_pool(pool)
    if len({r.patient_id for r in pool}) < 2:
        raise InsufficientPatients(
            f"pool of {len(pool)} record(s) has fewer than 2 distinct patients"
        )
    rng = random.Random(entry_seed)
    n = len(pool)
    for _ in range(200):
        a = pool[rng.randrange(n)]
        b = pool[rng.randrange(n)]
        if policy.pair_valid(a, b):
            return a, b
    valid = [(a, b) for a in pool for b in pool if policy.pair_valid(a, b)]
    if not valid:
        raise InsufficientPatients("no policy-valid pair exists in this pool")
    return valid[rng.randrange(len(valid))]


@dataclass(frozen=True)
class PlanEntry:
    """One synthetic sample to generate."""

    method: str  # glpb | mix | direct | jitter
    class_label: str
    magnification: int
    output_name: str
    seed: int
    source_a: str  # file path, or output name of an earlier planned synthetic
    source_b: str | None = None
    a_is_synthetic: bool = False
    mask_kind: str = "half_vertical"
    n_levels: int | None = None  # None: pick default_levels at execution
    transition_width: int | None = None  # mix; None: half the blend axis
    jitter_strength: float = 0.5


@dataclass(frozen=True)
class AugmentationPlan:
    entries: tuple[PlanEntry, ...]
    phase: str  # "balance" | "multiply"

    def __len__(self) -> int:
        return len(self.entries)


_METHODS = ("glpb", "mix", "direct", "jitter")


def _entry_identity(
    global_seed: int, phase: str, method: str, class_label: str, magnification: int, k: int
) -> tuple[int, str]:
    """Seed and output name for the k-th entry of a (phase, class, mag) pool.

    Hash-derived, so the values depend only on the listed inputs and never
    on the order the planner visited pools in.
    """
    key = f"{global_seed}|{phase}|{method}|{class_label}|{magnification}|{k}".encode()
    digest = hashlib.sha256(key).digest()
    seed = int.from_bytes(digest[:8], "big")
    name = f"GLPB_{class_label}_{magnification}_{digest[8:12].hex()}_{k:06d}.png"
    return seed, name


def _maybe_swap(a: SampleRecord, b: SampleRecord, entry_seed: int, randomize: bool):
    # one hash bit decides which source supplies the mask's 0-side
    if randomize and entry_seed & 1:
        return b, a
    return a, b


def _check_method(method: str) -> None:
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {_METHODS}")


def plan_balancing(
    index: DatasetIndex,
    policy: PairingPolicy,
    method: str = "glpb",
    seed: int = 0,
    *,
    mask_kind: str = "half_vertical",
    n_levels: int | None = None,
    transition_width: int | None = None,
    jitter_strength: float = 0.5,
    randomize_sides: bool = False,
) -> AugmentationPlan:
    """Plan enough minority-class synthetics to equalize the classes.

    Balancing is per magnification: each magnification's minority class is
    topped up by (majority - minority) entries paired from that
    magnification's own pool.  The majority class is left untouched.
    """
    _check_method(method)
    entries: list[PlanEntry] = []
    for mag in index.magnifications():
        counts = {c: len(index.records_for(c, mag)) for c in CLASSES}
        if counts["benign"] == counts["malignant"]:
            continue
        minority = min(CLASSES, key=lambda c: counts[c])
        majority = CLASSES[1] if minority == CLASSES[0] else CLASSES[0]
        needed = counts[majority] - counts[minority]
        pool = policy.filter_pool(index.records_for(minority, mag))
        if method != "jitter" and len({r.patient_id for r in pool}) < 2:
            raise InsufficientPatients(
                f"{minority}/{mag}x pool has fewer than 2 distinct patients; cannot plan blends"
            )
        if method == "jitter" and not pool:
            raise InsufficientPatients(f"{minority}/{mag}x pool is empty; cannot plan jitter")
        for k in range(needed):
            entry_seed, name = _entry_identity(seed, "balance", method, minority, mag, k)
            if method == "jitter":
                src = pool[random.Random(entry_seed).randrange(len(pool))]
                entries.append(
                    PlanEntry(
                        method=method,
                        class_label=minority,
                        magnification=mag,
                        output_name=name,
                        seed=entry_seed,
                        source_a=src.path,
                        jitter_strength=jitter_strength,
                    )
                )
                continue
            a, b = select_pair(pool, policy, entry_seed)
            a, b = _maybe_swap(a, b, entry_seed, randomize_sides)
            entries.append(
                PlanEntry(
                    method=method,
                    class_label=minority,
                    magnification=mag,
                    output_name=name,
                    seed=entry_seed,
                    source_a=a.path,
                    source_b=b.path,
                    mask_kind=mask_kind,
                    n_levels=n_levels,
                    transition_width=transition_width,
                )
            )
    return AugmentationPlan(tuple(entries), "balance")


def plan_multiplication(
    index: DatasetIndex,
    balanced_plan: AugmentationPlan | None,
    factor: int,
    method: str = "jitter",
    policy: PairingPolicy = PairingPolicy(),
    seed: int = 0,
    *,
    mask_kind: str = "half_vertical",
    n_levels: int | None = None,
    transition_width: int | None = None,
    jitter_strength: float = 0.5,
    randomize_sides: bool = False,
) -> AugmentationPlan:
    """Plan (factor - 1) x base-set-size additional synthetics.

    The base set is the original records plus everything the balancing
    plan will produce, spanning both classes.  Jitter entries reuse the
    base item itself as their source (balancing outputs included); blend
    entries draw fresh cross-patient pairs from the original records only,
    since synthetics are never blend sources.
    """
    _check_method(method)
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    if factor == 1:
        return AugmentationPlan((), "multiply")

    originals = policy.filter_pool(list(index.records))
    base: list[tuple[str, int, str, bool]] = [
        (r.class_label, r.magnification, r.path, False) for r in originals
    ]
    if balanced_plan is not None:
        base.extend(
            (e.class_label, e.magnification, e.output_name, True) for e in balanced_plan.entries
        )

    groups: dict[tuple[str, int], list[tuple[str, bool]]] = {}
    for cls, mag, source, synthetic in base:
        groups.setdefault((cls, mag), []).append((source, synthetic))

    entries: list[PlanEntry] = []
    for (cls, mag), items in sorted(groups.items()):
        blend_pool: list[SampleRecord] = []
        if method != "jitter":
            blend_pool = policy.filter_pool(index.records_for(cls, mag))
            if len({r.patient_id for r in blend_pool}) < 2:
                raise InsufficientPatients(
                    f"{cls}/{mag}x pool has fewer than 2 distinct patients; cannot plan blends"
                )
        k = 0
        for source, synthetic in items:
            for _ in range(factor - 1):
                entry_seed, name = _entry_identity(seed, "multiply", method, cls, mag, k)
                if method == "jitter":
                    entries.append(
                        PlanEntry(
                            method=method,
                            class_label=cls,
                            magnification=mag,
                            output_name=name,
                            seed=entry_seed,
                            source_a=source,
                            a_is_synthetic=synthetic,
                            jitter_strength=jitter_strength,
                        )
                    )
                else:
                    a, b = select_pair(blend_pool, policy, entry_seed)
                    a, b = _maybe_swap(a, b, entry_seed, randomize_sides)
                    entries.append(
                        PlanEntry(
                            method=method,
                            class_label=cls,
                            magnification=mag,
                            output_name=name,
                            seed=entry_seed,
                            source_a=a.path,
                            source_b=b.path,
                            mask_kind=mask_kind,
                            n_levels=n_levels,
                            transition_width=transition_width,
                        )
                    )
                k += 1
    return AugmentationPlan(tuple(entries), "multiply")


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def color_jitter(img: Image, strength: float, entry_seed: int) -> Image:
    """Seeded per-channel affine perturbation, clamped to [0, 1].

    Gains sit in [1 - 0.2*strength, 1 + 0.2*strength] and offsets in
    [-0.1*strength, +0.1*strength]; strength 0 is the identity.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {strength}")
    rng = random.Random(entry_seed)
    out = np.empty_like(img.planes)
    for c in range(img.channels):
        gain = np.float32(rng.uniform(1.0 - 0.2 * strength, 1.0 + 0.2 * strength))
        offset = np.float32(rng.uniform(-0.1 * strength, 0.1 * strength))
        np.multiply(img.planes[c], gain, out=out[c])
        out[c] += offset
    np.clip(out, 0.0, 1.0, out=out)
    return Image(out)


@dataclass(frozen=True)
class ManifestRecord:
    """Everything needed to regenerate one output byte-identically with the
    same toolkit version (or to see why it failed)."""

    output: str
    status: str  # "ok" | "failed"
    method: str
    class_label: str
    magnification: int
    sources: tuple[str, ...]
    seed: int
    version: str
    mask_kind: str | None = None
    n_levels: int | None = None
    transition_width: int | None = None
    jitter_strength: float | None = None
    resize_half: bool = False
    error: str | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d["sources"] = list(self.sources)
        return json.dumps(d, sort_keys=True)


def write_manifest(records: list[ManifestRecord], path: str | Path) -> None:
    """Write line-delimited records sorted by output name."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in sorted(records, key=lambda r: r.output):
            fh.write(rec.to_json() + "\n")


def read_manifest(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _mask_orientation(mask_kind: str) -> str:
    if mask_kind == "half_vertical":
        return "vertical"
    if mask_kind == "half_horizontal":
        return "horizontal"
    raise ValueError(f"unsupported mask kind for dataset execution: {mask_kind!r}")


def _load_source(
    source: str, synthetic: bool, out_dir: Path, resize_half: bool, kernel: Kernel
) -> Image:
    path = out_dir / source if synthetic else Path(source)
    img = load_image(path)
    # synthetics were already produced at the working resolution
    if resize_half and not synthetic:
        img = reduce(img, kernel)
    return img


def _execute_entry(
    entry: PlanEntry, out_dir: Path, kernel: Kernel, resize_half: bool
) -> ManifestRecord:
    base = dict(
        output=entry.output_name,
        method=entry.method,
        class_label=entry.class_label,
        magnification=entry.magnification,
        seed=entry.seed,
        version=__version__,
        resize_half=resize_half,
    )
    sources = (entry.source_a,) if entry.source_b is None else (entry.source_a, entry.source_b)
    try:
        a = _load_source(entry.source_a, entry.a_is_synthetic, out_dir, resize_half, kernel)
        if entry.method == "jitter":
            out = color_jitter(a, entry.jitter_strength, entry.seed)
            extra = dict(jitter_strength=entry.jitter_strength)
        else:
            if entry.source_b is None:
                raise ValueError(f"{entry.method} entry is missing its second source")
            b = _load_source(entry.source_b, False, out_dir, resize_half, kernel)
            orientation = _mask_orientation(entry.mask_kind)
            if entry.method == "glpb":
                n = entry.n_levels if entry.n_levels is not None else default_levels(a.width, a.height)
                mask = make_half_mask(a.width, a.height, orientation)
                out = pyramid_blend(a, b, mask, kernel, n)
                extra = dict(mask_kind=entry.mask_kind, n_levels=n)
            elif entry.method == "direct":
                mask = make_half_mask(a.width, a.height, orientation)
                out = direct_blend(a, b, mask)
                extra = dict(mask_kind=entry.mask_kind)
            elif entry.method == "mix":
                span = a.width if orientation == "vertical" else a.height
                tw = entry.transition_width if entry.transition_width is not None else span // 2
                out = mix_blend(a, b, orientation, tw)
                extra = dict(mask_kind=entry.mask_kind, transition_width=tw)
            else:
                raise ValueError(f"unknown method {entry.method!r}")
        save_image(out, out_dir / entry.output_name)
        return ManifestRecord(status="ok", sources=sources, **base, **extra)
    except (GlpbError, OSError, ValueError) as exc:
        return ManifestRecord(status="failed", sources=sources, error=str(exc), **base)


def execute_plan(
    plan: AugmentationPlan,
    out_dir: str | Path,
    workers: int = 1,
    kernel: Kernel = BINOMIAL_KERNEL,
    resize_half: bool = False,
) -> list[ManifestRecord]:
    """Generate every planned output under out_dir.

    Entries are independent; a failing entry is recorded and skipped, not
    fatal.  The returned records are sorted by output name so the manifest
    is identical for any worker count.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    entries = list(plan.entries)
    if workers <= 1:
        results = [_execute_entry(e, out_path, kernel, resize_half) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda e: _execute_entry(e, out_path, kernel, resize_half), entries))
    return sorted(results, key=lambda r: r.output)
