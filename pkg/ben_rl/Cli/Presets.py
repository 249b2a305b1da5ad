"""Named experiment presets.

A preset is a config document (same sections as a run config file) plus
an optional list of variants. Each variant is a label and a partial
document merged over the resolved config; every variant gets its own
metrics file.
"""
import copy

from ..Errors import ConfigError

_tiger = {
    "environment": {"name": "tiger", "args": {}},
    "model": {"qnet": {"hidden_dim": 32, "encoding_dim": 2, "q_scale": 100.0}},
    "train": {
        "posterior": "exact_tiger",
        "lr_omega": 0.005,
        "n_pretrain": 3000,
        "n_update": 20,
        "n_mc": 4,
        "msbbe_batch": 4,
        "max_steps": 11,
        "n_episodes": 1,
    },
    "seeds": list(range(20)),
}

_search_rescue = {
    "environment": {"name": "search_rescue", "args": {}},
    "model": {"qnet": {"hidden_dim": 64, "encoding_dim": 64, "q_scale": 10.0}},
    "train": {
        "posterior": "variational_flow",
        "lr_omega": 1e-4,
        "lr_psi": 1e-4,
        "n_pretrain": 200,
    },
    "seeds": list(range(5)),
}


def _with(base, **sections):
    document = copy.deepcopy(base)
    for name, values in sections.items():
        document.setdefault(name, {}).update(values)
    return document


PRESETS = {
    "tiger": {"config": _tiger, "variants": []},
    "tiger_fig8": {
        "config": _tiger,
        "variants": [
            (f"msbbe_steps_{steps}", {"train": {"n_update": steps}}) for steps in (1, 5, 20)
        ],
    },
    "sar_episodic": {
        "config": _with(_search_rescue, train={"mode": "episodic_tabula_rasa", "n_episodes": 5}),
        "variants": [],
    },
    "sar_weak_prior": {
        "config": _with(_search_rescue, train={"mode": "episodic_weak_prior", "n_episodes": 5}),
        "variants": [],
    },
    "sar_zero_shot": {
        "config": _with(_search_rescue, train={"mode": "zero_shot_strong_prior", "n_episodes": 1}),
        "variants": [
            ("ben", {"model": {"qnet": {"history_mode": "recurrent"}}}),
            ("contextual", {"model": {"qnet": {"history_mode": "contextual"}}}),
        ],
    },
}

ABLATION_AXES = ("aleatoric_layers", "pretrain_steps", "contextual")
DEFAULT_PRETRAIN_GRID = (0, 50, 200, 1000)


def get_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"Unknown preset: {name} (known: {', '.join(sorted(PRESETS))})")
    return copy.deepcopy(PRESETS[name])


def ablation_variants(axis: str, pretrain_grid=DEFAULT_PRETRAIN_GRID):
    if axis == "aleatoric_layers":
        return [(f"aleatoric_layers_{n}", {"model": {"aleatoric": {"n_layers": n}}}) for n in (1, 2, 3, 4)]
    if axis == "pretrain_steps":
        return [(f"pretrain_steps_{n}", {"train": {"n_pretrain": int(n)}}) for n in pretrain_grid]
    if axis == "contextual":
        return [
            ("ben", {"model": {"qnet": {"history_mode": "recurrent"}}}),
            ("contextual", {"model": {"qnet": {"history_mode": "contextual"}}}),
        ]
    raise ConfigError(f"Unknown ablation axis: {axis} (known: {', '.join(ABLATION_AXES)})")
