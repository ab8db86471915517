"""Flat ``key = value`` configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .linker import DEFAULT_INTERROGATIVES, DEFAULT_TOP_K, DEFAULT_WEIGHTS


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    lexicon_normalize: bool = False
    lexicon_include_kb_subjects: bool = False
    tagger_emissions: str = "lexicon"
    tagger_command: str = ""
    linker_weights: tuple[float, ...] = DEFAULT_WEIGHTS
    linker_top_k: int = DEFAULT_TOP_K
    linker_interrogatives: tuple[str, ...] = DEFAULT_INTERROGATIVES
    linker_mask_one_entity: tuple[int, ...] = (1, 1, 1, 1, 1)
    linker_mask_multi_entity: tuple[int, ...] = (1, 1, 1, 1, 1)
    schemas_enabled: tuple[str, ...] = ("S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8")
    beam_k: int = 5              # 0 = no pruning
    beam_hops: tuple[int, ...] = (1,)
    scorer: str = "ngram"
    scorer_n: int = 2
    scorer_command: str = ""
    ranker_scorer: str = "same"  # same | ngram | external
    ranker_command: str = ""
    classifier_model: str = ""
    classifier_seed: int = 0
    synth_language: str = "en"
    synth_templates: str = ""
    workers: int = 1


KEYS = {
    "lexicon.normalize": "lexicon_normalize",
    "lexicon.include_kb_subjects": "lexicon_include_kb_subjects",
    "tagger.emissions": "tagger_emissions",
    "tagger.command": "tagger_command",
    "linker.weights": "linker_weights",
    "linker.top_k": "linker_top_k",
    "linker.interrogatives": "linker_interrogatives",
    "linker.mask_one_entity": "linker_mask_one_entity",
    "linker.mask_multi_entity": "linker_mask_multi_entity",
    "schemas.enabled": "schemas_enabled",
    "beam.k": "beam_k",
    "beam.hops": "beam_hops",
    "scorer": "scorer",
    "scorer.n": "scorer_n",
    "scorer.command": "scorer_command",
    "ranker.scorer": "ranker_scorer",
    "ranker.command": "ranker_command",
    "classifier.model": "classifier_model",
    "classifier.seed": "classifier_seed",
    "synth.language": "synth_language",
    "synth.templates": "synth_templates",
    "workers": "workers",
}


def _parse_list(raw: str) -> list[str]:
    body = raw.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ConfigError(f"expected a [list], got {raw!r}")
    items = [x.strip() for x in body[1:-1].split(",")]
    return [x.strip("'\"") for x in items if x]


def _coerce(raw: str, default):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in {"true", "1", "yes", "on"}:
            return True
        if low in {"false", "0", "no", "off"}:
            return False
        raise ConfigError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, tuple):
        items = _parse_list(raw)
        if default and isinstance(default[0], float):
            return tuple(float(x) for x in items)
        if default and isinstance(default[0], int):
            return tuple(int(x) for x in items)
        return tuple(items)
    return raw.strip().strip("'\"")


def parse_config(text: str, base: Config | None = None) -> Config:
    cfg = base or Config()
    keys = KEYS
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in keys:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr = keys[key]
        try:
            setattr(cfg, attr, _coerce(value, getattr(Config(), attr)))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: Config) -> None:
    if len(cfg.linker_weights) != 5:
        raise ConfigError("linker.weights needs five values")
    if cfg.linker_top_k < 1:
        raise ConfigError("linker.top_k must be >= 1")
    if cfg.tagger_emissions not in {"lexicon", "external"}:
        raise ConfigError("tagger.emissions must be 'lexicon' or 'external'")
    if cfg.scorer not in {"ngram", "external"}:
        raise ConfigError("scorer must be 'ngram' or 'external'")
    if cfg.ranker_scorer not in {"same", "ngram", "external"}:
        raise ConfigError("ranker.scorer must be 'same', 'ngram' or 'external'")
    if cfg.beam_k < 0:
        raise ConfigError("beam.k must be >= 0")
    if any(h not in (1, 2, 3) for h in cfg.beam_hops):
        raise ConfigError("beam.hops entries must be 1, 2 or 3")


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
