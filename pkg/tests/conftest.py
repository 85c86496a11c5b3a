"""Shared helpers for building synthetic images and corpora."""

import numpy as np

from glpb.dataset import BENIGN_SUBTYPES, MALIGNANT_SUBTYPES, DatasetIndex, SampleRecord
from glpb.imgio import save_image
from glpb.pyramid import Image


def rand_image(rng, width, height, channels=1):
    return Image(rng.random((channels, height, width), dtype=np.float32))


def smooth_image(rng, width, height, low=0.1, high=0.9):
    """Low-frequency gradient image; adjacent pixels differ only slightly.

    Useful wherever the seam metric must reflect the stitch rather than
    texture noise.
    """
    yy = np.linspace(0.0, 1.0, height, dtype=np.float32)[:, None]
    xx = np.linspace(0.0, 1.0, width, dtype=np.float32)[None, :]
    planes = []
    for _ in range(3):
        mix = rng.random()
        plane = low + (high - low) * (mix * yy + (1.0 - mix) * xx)
        planes.append(plane)
    return Image(np.stack(planes).astype(np.float32))


def spread_counts(total, n_bins):
    """Split total into n_bins near-equal integer parts."""
    base, extra = divmod(total, n_bins)
    return [base + (1 if i < extra else 0) for i in range(n_bins)]


def make_index(
    benign_images,
    malignant_images,
    benign_patients=4,
    malignant_patients=8,
    magnifications=(40,),
):
    """Synthesize an in-memory index with the requested class totals.

    Images are spread near-evenly over the magnifications, cycled over the
    patients; each patient keeps a single subtype.
    """
    records = []
    specs = [
        ("benign", "B", BENIGN_SUBTYPES, benign_images, benign_patients, "90"),
        ("malignant", "M", MALIGNANT_SUBTYPES, malignant_images, malignant_patients, "91"),
    ]
    for cls, letter, subtypes, total, n_patients, prefix in specs:
        patients = [f"{prefix}-{i:04d}" for i in range(n_patients)]
        patient_subtype = {p: subtypes[i % len(subtypes)] for i, p in enumerate(patients)}
        seq = 0
        for mag, count in zip(magnifications, spread_counts(total, len(magnifications))):
            for i in range(count):
                pid = patients[i % n_patients]
                st = patient_subtype[pid]
                name = f"SOB_{letter}_{st}-{pid}-{mag}-{seq:05d}.png"
                records.append(
                    SampleRecord(
                        path=f"/corpus/{cls}/{name}",
                        class_label=cls,
                        subtype=st,
                        patient_id=pid,
                        magnification=mag,
                        sequence=seq,
                    )
                )
                seq += 1
    return DatasetIndex(tuple(records))


def make_corpus_dir(
    root,
    rng,
    benign_images,
    malignant_images,
    benign_patients=3,
    malignant_patients=4,
    magnification=40,
    width=64,
    height=48,
):
    """Write a small on-disk corpus of smooth PNGs; returns the root."""
    root.mkdir(parents=True, exist_ok=True)
    specs = [
        ("B", "TA", benign_images, benign_patients, "80"),
        ("M", "DC", malignant_images, malignant_patients, "81"),
    ]
    for letter, st, total, n_patients, prefix in specs:
        for i in range(total):
            pid = f"{prefix}-{i % n_patients + 1:04d}"
            name = f"SOB_{letter}_{st}-{pid}-{magnification}-{i:03d}.png"
            save_image(smooth_image(rng, width, height), root / name)
    return root
