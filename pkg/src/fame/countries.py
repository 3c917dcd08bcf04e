"""Country reference table: codes, display names, continents, demonyms.

Source databases and gazetteers name countries heterogeneously, so every
module joins on ISO-3166 alpha-3 codes resolved through this table. A
packaged CSV covers the common cases; callers may load their own table
with extra aliases.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator

from .errors import UnknownCountryError
from .text import fold

logger = logging.getLogger(__name__)

_CODE_LEN = 3


@dataclass(frozen=True)
class Country:
    code: str
    name: str
    continent: str
    demonyms: tuple[str, ...] = ()
    aliases: tuple[str, ...] = ()


class CountryTable:
    """Alpha-3 registry with case-insensitive name/alias resolution."""

    def __init__(self, countries: list[Country]):
        self._by_code: dict[str, Country] = {}
        self._by_alias: dict[str, str] = {}
        for c in countries:
            code = c.code.upper()
            if code in self._by_code:
                raise UnknownCountryError(f"duplicate country code {code}")
            self._by_code[code] = c
            self._by_alias[fold(code)] = code
            self._by_alias.setdefault(fold(c.name), code)
            for alias in c.aliases:
                self._by_alias.setdefault(fold(alias), code)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "CountryTable":
        """Load from a CSV (code,name,continent,demonyms,aliases).

        Demonyms and aliases are `;`-separated. Without a path the
        packaged default table is used.
        """
        if path is None:
            text = resources.files("fame.data").joinpath("countries.csv").read_text("utf-8")
            lines = text.splitlines()
        else:
            lines = Path(path).read_text("utf-8").splitlines()
        countries = []
        for row in csv.DictReader(lines):
            countries.append(
                Country(
                    code=row["code"].strip().upper(),
                    name=row["name"].strip(),
                    continent=row["continent"].strip(),
                    demonyms=_split_multi(row.get("demonyms", "")),
                    aliases=_split_multi(row.get("aliases", "")),
                )
            )
        return cls(countries)

    def __contains__(self, code: str) -> bool:
        return code.upper() in self._by_code

    def __iter__(self) -> Iterator[Country]:
        return iter(self._by_code.values())

    def __len__(self) -> int:
        return len(self._by_code)

    def codes(self) -> list[str]:
        return list(self._by_code)

    def get(self, code: str) -> Country:
        try:
            return self._by_code[code.upper()]
        except KeyError:
            raise UnknownCountryError(f"unknown country code {code!r}") from None

    def display_name(self, code: str) -> str:
        return self.get(code).name

    def continent(self, code: str) -> str:
        return self.get(code).continent

    def resolve(self, text: str) -> str:
        """Map a code, country name, or alias to its alpha-3 code."""
        key = fold(text.strip())
        if not key:
            raise UnknownCountryError("empty country value")
        try:
            return self._by_alias[key]
        except KeyError:
            raise UnknownCountryError(f"unrecognized country {text!r}") from None


def _split_multi(cell: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in cell.split(";") if p.strip())


_DEFAULT: CountryTable | None = None


def default_table() -> CountryTable:
    """The packaged table, loaded once per process."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = CountryTable.load()
    return _DEFAULT
