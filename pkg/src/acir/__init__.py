from pathlib import Path

__version__ = "0.1.0"

# Path to the bundled matplotlib style sheet, used by the benchmark plots.
# To override: pass your own style to plt.style.context around the call.
style_path = str(Path(__file__).parent / "params" / "acir.mplstyle")
