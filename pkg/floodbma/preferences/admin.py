# floodbma/preferences/admin.py
from rich.panel import Panel
from rich.tree import Tree

from floodbma.logger import get_logger
from floodbma.preferences.models import RunConfig
from floodbma.ui import console, print_info

logger = get_logger(__name__)

ESSENTIAL_KEYS = [
    ("seed", "Master seed"),
    ("data.maxima", "Maxima file"),
    ("data.covariates", "Covariates file"),
    ("data.min_years", "Minimum record length"),
    ("chain.n_iterations", "Iterations"),
    ("chain.n_burnin", "Burn-in"),
    ("chain.thin", "Thinning"),
    ("priors.inclusion_prob", "Prior inclusion probability"),
    ("prediction.return_periods", "Return periods"),
    ("validation.folds", "CV folds"),
    ("output.directory", "Output directory"),
]


def get_from_dotpath(data: dict, dotpath: str):
    node = data
    for key in dotpath.split("."):
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def _add_subtree(branch: Tree, node) -> None:
    if isinstance(node, dict):
        for key, val in node.items():
            _add_subtree(branch.add(f"[bold]{key}[/bold]"), val)
    else:
        branch.add(f"[dim]=[/dim] {node}")


def config_tree(config: RunConfig, full: bool = False) -> Tree:
    data = config.echo()
    if full:
        tree = Tree("[bold green]Full configuration[/bold green]")
        _add_subtree(tree, data)
        return tree
    tree = Tree("[bold green]Essential configuration[/bold green]")
    for dotpath, label in ESSENTIAL_KEYS:
        val = get_from_dotpath(data, dotpath)
        display = str(val) if val is not None else "[grey50]–[/grey50]"
        tree.add(f"[bold]{label}[/bold]: {display}")
    return tree


def show_config(config: RunConfig, sources: list, full: bool = False) -> None:
    """Render the active configuration and the files it was layered from."""
    origin = "\n".join(str(p) for p in sources) or "packaged defaults only"
    console.print(
        Panel.fit(
            f"[primary]floodbma configuration[/primary]\n[info]{origin}[/info]",
            title=f"Active configuration ({'Full' if full else 'Abridged'})",
        )
    )
    console.print(config_tree(config, full))
    if not full:
        print_info("\nTip: run [primary]floodbma config --full[/primary] to view every setting.")
