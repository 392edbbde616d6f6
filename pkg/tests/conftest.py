"""Shared fixtures for the DRS toolkit tests."""
from __future__ import annotations

import json
import os
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from drs_toolkit.const import DRS_SUFFIX, IDS_SUFFIX, MANIFEST_FILE, TEXT_SUFFIX
from drs_toolkit.sequence_model import DEFAULT_INVENTORY, SymbolInventory

settings.register_profile(
    "ci", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("dev", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

FIXTURES = Path(__file__).parent / "fixtures"

# Typical parser whitespace errors and well-formed gold lines
ILL_FORMED_LINES = (
    'geological_formation.n.01 Name " Himalayas"',
    "driving_ licence.n.01 Owner speaker",
    "person.n.01 Role +1technician.n.01",
)
GOLD_LINES = (
    'geological_formation.n.01 Name "Himalayas"',
    "driving_licence.n.01 Owner speaker",
    "person.n.01 Role +1 engineer.n.01",
    "person.n.01 exaggerate.v.01 Agent -1 Time +1 time.n.08 TPR now",
    "person.n.01 time.n.08 TPR now eye.n.01 blind.a.01 Theme -3 Time -2",
    'female.n.02 Name "Maria"',
    "young.a.01 person.n.01 Attribute -1",
    "more_and_more.r.01",
)

CorpusLayout = Mapping[str, Mapping[str, Mapping[str, Sequence[tuple[str, str]]]]]


@pytest.fixture
def inventory() -> SymbolInventory:
    """Return the default symbol inventory."""
    return DEFAULT_INVENTORY


@pytest.fixture
def fixtures_dir() -> Path:
    """Return the static fixture directory."""
    return FIXTURES


@pytest.fixture
def well_formed_lines() -> list[str]:
    """Return the bundled well-formed DRS lines."""
    return (FIXTURES / "well_formed.drs").read_text(encoding="utf-8").splitlines()


@pytest.fixture
def make_corpus(tmp_path: Path) -> Callable[..., Path]:
    """Return a builder of <lang>/<tier>/<split>.{txt,drs} trees."""

    def _make(
        layout: CorpusLayout,
        ids: Mapping[tuple[str, str, str], Sequence[str]] | None = None,
        manifest: dict | None = None,
        name: str = "corpus",
    ) -> Path:
        root = tmp_path / name
        for lang, tiers in layout.items():
            for tier, splits in tiers.items():
                directory = root / lang / tier
                directory.mkdir(parents=True, exist_ok=True)
                for split, docs in splits.items():
                    (directory / f"{split}{TEXT_SUFFIX}").write_text(
                        "".join(f"{text}\n" for text, _ in docs), encoding="utf-8"
                    )
                    (directory / f"{split}{DRS_SUFFIX}").write_text(
                        "".join(f"{drs}\n" for _, drs in docs), encoding="utf-8"
                    )
                    if ids and (lang, tier, split) in ids:
                        (directory / f"{split}{IDS_SUFFIX}").write_text(
                            "".join(f"{doc_id}\n" for doc_id in ids[(lang, tier, split)]),
                            encoding="utf-8",
                        )
        root.mkdir(parents=True, exist_ok=True)
        if manifest is not None:
            (root / MANIFEST_FILE).write_text(json.dumps(manifest), encoding="utf-8")
        return root

    return _make


@pytest.fixture
def parallel_corpus(make_corpus: Callable[..., Path]) -> Path:
    """Return a small corpus with aligned English, German and Dutch documents."""
    drs = ("person.n.01 Role +1 engineer.n.01", 'female.n.02 Name "Maria"', "cat.n.01")
    texts = {
        "en": ("He is an engineer .", "Maria .", "A cat ."),
        "de": ("Er ist Ingenieur .", "Maria .", "Eine Katze ."),
        "nl": ("Hij is ingenieur .", "Maria .", "Een kat ."),
    }
    layout = {
        lang: {
            "gold": {
                "train": list(zip(lang_texts, drs)),
                "dev": [(lang_texts[0], drs[0])],
                "test": [(lang_texts[1], drs[1])],
            },
            "silver": {"train": [(lang_texts[2], drs[2])]},
        }
        for lang, lang_texts in texts.items()
    }
    ids = {
        (lang, tier, split): [f"pmb/{tier}/{split}/{i:02d}" for i in range(len(docs))]
        for lang, tiers in layout.items()
        for tier, splits in tiers.items()
        for split, docs in splits.items()
    }
    return make_corpus(layout, ids=ids)
