"""Lookup of shipped fixture files: profiles, catalogs, consents, scenarios.

Every loader accepts either a bare fixture name (resolved inside the
package) or a filesystem path, so CLI flags work with both.
"""

from __future__ import annotations

import os
from importlib import resources

from .consent import ConsentTuple, parse_consent_document
from .errors import MalformedSpec, UnknownProfile
from .irreversibility import IrreversibilityCatalog, parse_catalog
from .policy import PolicyProfile, parse_profile

_FIXTURES = resources.files("corve").joinpath("fixtures")


def _read_fixture(subdir: str, name: str) -> str | None:
    entry = _FIXTURES.joinpath(subdir).joinpath(f"{name}.json")
    if entry.is_file():
        return entry.read_text(encoding="utf-8")
    return None


def _read(subdir: str, name_or_path: str) -> str | None:
    if os.path.exists(name_or_path):
        with open(name_or_path, encoding="utf-8") as fh:
            return fh.read()
    return _read_fixture(subdir, name_or_path)


def list_fixture_names(subdir: str) -> list[str]:
    entry = _FIXTURES.joinpath(subdir)
    return sorted(
        p.name[: -len(".json")] for p in entry.iterdir() if p.name.endswith(".json")
    )


def load_profile(name_or_path: str) -> PolicyProfile:
    text = _read("profiles", name_or_path)
    if text is None:
        known = ", ".join(list_fixture_names("profiles"))
        raise UnknownProfile(f"no profile {name_or_path!r} (shipped: {known})")
    return parse_profile(text)


def load_catalog(name_or_path: str) -> IrreversibilityCatalog:
    text = _read("catalogs", name_or_path)
    if text is None:
        known = ", ".join(list_fixture_names("catalogs"))
        raise MalformedSpec(f"no catalog {name_or_path!r} (shipped: {known})")
    return parse_catalog(text)


def load_consent(name_or_path: str) -> ConsentTuple:
    text = _read("consents", name_or_path)
    if text is None:
        known = ", ".join(list_fixture_names("consents"))
        raise MalformedSpec(f"no consent document {name_or_path!r} (shipped: {known})")
    return parse_consent_document(text)


def read_scenario_text(name_or_path: str) -> str:
    text = _read("scenarios", name_or_path)
    if text is None:
        known = ", ".join(list_fixture_names("scenarios"))
        raise MalformedSpec(f"no scenario {name_or_path!r} (shipped: {known})")
    return text
