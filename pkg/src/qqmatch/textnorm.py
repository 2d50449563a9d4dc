"""Deterministic query pre-processing.

Produces the two text variants every scorer consumes: the *unnormalized*
form (cleaning, contraction expansion, product normalization, acronym
expansion) and the *normalized* form (additionally verb-lemmatized and
noun-singularized).

Pipeline order matters: contraction keys contain apostrophes, so the
first cleaning pass keeps apostrophes and the final punctuation sweep
runs only after acronym expansion.  Lemmatization and singularization
are lexicon-gated lookup tables plus ordered suffix rules; tokens
outside the lexicons pass through untouched.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import FormatError

# Curly quotes show up in copy-pasted queries; fold them before cleaning.
_QUOTE_FOLD = str.maketrans({"‘": "'", "’": "'", "ʼ": "'"})

_NON_WORD = re.compile(r"[^a-z0-9 ]+")
_NON_WORD_KEEP_APOS = re.compile(r"[^a-z0-9' ]+")
_WS_RUN = re.compile(r"\s+")

# Auxiliaries and determiners that must never be inflection candidates;
# loaders reject lexicons overlapping this set ("is" - "i" would corrupt
# every query).
STOP_TOKENS = frozenset(
    "a an and are be been being by do for from in is it of on or "
    "the this to was were what when where which who why will with".split()
)


def basic_clean(text: str, keep_apostrophes: bool = False) -> str:
    """Lower-case, replace punctuation with spaces, collapse whitespace.

    ``keep_apostrophes`` preserves ``'`` so a later contraction pass can
    still see its keys; the final sweep of :func:`preprocess` runs with
    the default (strip everything).
    """
    text = text.lower().translate(_QUOTE_FOLD)
    pattern = _NON_WORD_KEEP_APOS if keep_apostrophes else _NON_WORD
    text = pattern.sub(" ", text)
    return _WS_RUN.sub(" ", text).strip()


def _load_json_map(path: Path) -> dict[str, str]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise FormatError(f"{path}: expected a flat string-to-string JSON object")
    return data


def _load_tsv_pairs(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'key<TAB>value', got {line!r}")
        out[parts[0].strip()] = parts[1].strip()
    return out


def _load_suffix_rules(path: Path) -> tuple[tuple[str, str], ...]:
    rules: list[tuple[str, str]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) == 1:
            parts = [parts[0], ""]
        if len(parts) != 2 or not parts[0]:
            raise FormatError(f"{path}:{lineno}: expected 'suffix<TAB>replacement'")
        rules.append((parts[0].strip(), parts[1].strip()))
    return tuple(rules)


def _load_lexicon(path: Path) -> frozenset[str]:
    tokens = {line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()}
    tokens.discard("")
    return frozenset(tokens)


@dataclass(frozen=True)
class NormalizationConfig:
    """Immutable lookup tables driving :func:`preprocess`."""

    contraction_map: Mapping[str, str]
    product_map: Mapping[str, str]
    acronym_map: Mapping[str, str]
    verb_exceptions: Mapping[str, str]
    verb_rules: tuple[tuple[str, str], ...]
    noun_exceptions: Mapping[str, str]
    noun_rules: tuple[tuple[str, str], ...]
    verb_lexicon: frozenset[str]
    noun_lexicon: frozenset[str]
    # product keys grouped by token count, longest first, for greedy matching
    _product_phrases: tuple[tuple[tuple[str, ...], str], ...] = field(init=False)
    _acronym_phrases: tuple[tuple[tuple[str, ...], str], ...] = field(init=False)

    def __post_init__(self) -> None:
        self._validate()
        object.__setattr__(self, "_product_phrases", _phrase_table(self.product_map))
        object.__setattr__(self, "_acronym_phrases", _phrase_table(self.acronym_map))

    def _validate(self) -> None:
        for name, mapping, extra in (
            ("contraction_map", self.contraction_map, "'"),
            ("product_map", self.product_map, ""),
            ("acronym_map", self.acronym_map, ""),
        ):
            allowed = set("abcdefghijklmnopqrstuvwxyz0123456789 " + extra)
            for key in mapping:
                if not key or not set(key) <= allowed:
                    raise FormatError(
                        f"{name} key {key!r} must be lower-case and punctuation-free"
                    )
        # single-pass closure: no rewrite may introduce another rewrite's key
        rewrite_keys = set(self.product_map) | set(self.acronym_map)
        for name, mapping in (("product_map", self.product_map), ("acronym_map", self.acronym_map)):
            for key, value in mapping.items():
                value_tokens = value.split()
                ngrams = {
                    " ".join(value_tokens[i:j])
                    for i in range(len(value_tokens))
                    for j in range(i + 1, len(value_tokens) + 1)
                }
                hit = ngrams & rewrite_keys
                if hit:
                    raise FormatError(
                        f"{name}[{key!r}] value {value!r} contains map key(s) {sorted(hit)}; "
                        "rewrites must close in one pass"
                    )
        for name, lexicon in (("verb_lexicon", self.verb_lexicon), ("noun_lexicon", self.noun_lexicon)):
            overlap = lexicon & STOP_TOKENS
            if overlap:
                raise FormatError(f"{name} overlaps stop tokens: {sorted(overlap)}")

    @classmethod
    def from_paths(
        cls,
        contractions: Path,
        products: Path,
        acronyms: Path,
        verb_exceptions: Path,
        verb_suffix_rules: Path,
        noun_exceptions: Path,
        noun_suffix_rules: Path,
        verb_lexicon: Path,
        noun_lexicon: Path,
    ) -> "NormalizationConfig":
        return cls(
            contraction_map=_load_json_map(contractions),
            product_map=_load_json_map(products),
            acronym_map=_load_json_map(acronyms),
            verb_exceptions=_load_tsv_pairs(verb_exceptions),
            verb_rules=_load_suffix_rules(verb_suffix_rules),
            noun_exceptions=_load_tsv_pairs(noun_exceptions),
            noun_rules=_load_suffix_rules(noun_suffix_rules),
            verb_lexicon=_load_lexicon(verb_lexicon),
            noun_lexicon=_load_lexicon(noun_lexicon),
        )

    @classmethod
    def default(cls) -> "NormalizationConfig":
        """Tables shipped with the package (financial-domain defaults)."""
        root = importlib_resources.files("qqmatch").joinpath("data/norm")
        return cls.from_paths(
            contractions=Path(str(root / "contractions.json")),
            products=Path(str(root / "products.json")),
            acronyms=Path(str(root / "acronyms.json")),
            verb_exceptions=Path(str(root / "verb_exceptions.tsv")),
            verb_suffix_rules=Path(str(root / "verb_suffix_rules.tsv")),
            noun_exceptions=Path(str(root / "noun_exceptions.tsv")),
            noun_suffix_rules=Path(str(root / "noun_suffix_rules.tsv")),
            verb_lexicon=Path(str(root / "verb_lexicon.txt")),
            noun_lexicon=Path(str(root / "noun_lexicon.txt")),
        )


def _phrase_table(mapping: Mapping[str, str]) -> tuple[tuple[tuple[str, ...], str], ...]:
    entries = [(tuple(k.split()), v) for k, v in mapping.items()]
    entries.sort(key=lambda e: (-len(e[0]), e[0]))
    return tuple(entries)


@dataclass(frozen=True)
class PreprocessedQuery:
    raw: str
    unnormalized: str
    normalized: str
    unnorm_tokens: tuple[str, ...]
    norm_tokens: tuple[str, ...]
    fuzzy_token_set: frozenset[str]


def expand_contractions(text: str, config: NormalizationConfig) -> str:
    """Replace contraction tokens ("i've") by their expansions ("i have")."""
    mapping = config.contraction_map
    return " ".join(mapping.get(tok, tok) for tok in text.split())


def _apply_phrases(
    tokens: Sequence[str], phrases: tuple[tuple[tuple[str, ...], str], ...]
) -> list[str]:
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        for key, value in phrases:
            k = len(key)
            if i + k <= n and tuple(tokens[i : i + k]) == key:
                out.extend(value.split())
                i += k
                break
        else:
            out.append(tokens[i])
            i += 1
    return out


def normalize_products(text: str, config: NormalizationConfig) -> str:
    """Map product surface forms ("401 k") onto canonical tokens ("401k")."""
    return " ".join(_apply_phrases(text.split(), config._product_phrases))


def expand_acronyms(text: str, config: NormalizationConfig) -> str:
    """Replace acronym tokens by their expansion phrases, token-exact."""
    return " ".join(_apply_phrases(text.split(), config._acronym_phrases))


def _inflect(
    token: str,
    exceptions: Mapping[str, str],
    lexicon: frozenset[str],
    rules: tuple[tuple[str, str], ...],
) -> str:
    if token in exceptions:
        return exceptions[token]
    if token not in lexicon:
        return token
    for suffix, repl in rules:
        if token.endswith(suffix) and len(token) - len(suffix) >= 2:
            return token[: -len(suffix)] + repl
    return token


def lemmatize_verbs(tokens: Iterable[str], config: NormalizationConfig) -> list[str]:
    return [
        _inflect(t, config.verb_exceptions, config.verb_lexicon, config.verb_rules)
        for t in tokens
    ]


def singularize_nouns(tokens: Iterable[str], config: NormalizationConfig) -> list[str]:
    return [
        _inflect(t, config.noun_exceptions, config.noun_lexicon, config.noun_rules)
        for t in tokens
    ]


def preprocess(raw_text: str, config: NormalizationConfig) -> PreprocessedQuery:
    """Run the full pipeline and return both text variants."""
    text = basic_clean(raw_text, keep_apostrophes=True)
    text = expand_contractions(text, config)
    # apostrophes have served their purpose; later stages see clean tokens
    # (a possessive left in place would hide its head word from the maps)
    text = basic_clean(text)
    text = normalize_products(text, config)
    text = expand_acronyms(text, config)
    unnormalized = basic_clean(text)
    unnorm_tokens = tuple(unnormalized.split())
    norm_tokens = tuple(
        singularize_nouns(lemmatize_verbs(unnorm_tokens, config), config)
    )
    return PreprocessedQuery(
        raw=raw_text,
        unnormalized=unnormalized,
        normalized=" ".join(norm_tokens),
        unnorm_tokens=unnorm_tokens,
        norm_tokens=norm_tokens,
        fuzzy_token_set=frozenset(unnorm_tokens),
    )
