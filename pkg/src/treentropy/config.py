import os

DEFAULT_BUDGET = 10**8
ENUMERATION_BUDGET = 10**6


def resolve_budget(budget=None):
    """Expansion budget in nodes; ``TREENTROPY_BUDGET`` overrides the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get("TREENTROPY_BUDGET")
    if env:
        return int(env)
    return DEFAULT_BUDGET
