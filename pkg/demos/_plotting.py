"""Optional matplotlib helper: demos print their numbers and plot only when matplotlib is present."""

from pathlib import Path

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # demos still run and print without plots
    plt = None

OUT = Path(__file__).resolve().parent / "figures"


def save(fig, name: str) -> None:
    OUT.mkdir(exist_ok=True)
    fig.savefig(OUT / name, dpi=120, bbox_inches="tight")
    print(f"saved {OUT / name}")
