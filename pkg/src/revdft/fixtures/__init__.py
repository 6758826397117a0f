"""Small benchmark circuits shipped with the package (at most 6 lines each)."""
from importlib import resources

from ..circuit import Circuit
from ..tfc import parse_tfc


def names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".tfc"))


def text(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.tfc").read_text(encoding="utf-8")


def load(name: str) -> Circuit:
    return parse_tfc(text(name))


def load_all() -> dict[str, Circuit]:
    return {name: load(name) for name in names()}
