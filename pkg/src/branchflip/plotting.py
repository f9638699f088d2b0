"""Report figures.  Uses the non-interactive Agg backend."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402


def plot_delta_trace(traces, path, title="disoriented edges per step"):
    """``traces`` is a list of [(tag, |delta|), ...] runs."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for trace in traces:
        ax.plot(range(len(trace)), [d for _, d in trace], lw=0.8, alpha=0.6)
    ax.set_xlabel("paired step")
    ax.set_ylabel("|delta|")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_inversion_graph(G, path, title="inversion graph"):
    fig, ax = plt.subplots(figsize=(5, 5))
    nodes = sorted(G.nodes)
    pos = nx.spring_layout(G, seed=0) if len(nodes) > 1 else {n: (0, 0) for n in nodes}
    comps = list(nx.connected_components(G))
    color = {n: k for k, c in enumerate(comps) for n in c}
    nx.draw_networkx_edges(G, pos, ax=ax, width=0.6, alpha=0.5)
    nx.draw_networkx_nodes(G, pos, ax=ax, nodelist=nodes, node_size=40,
                           node_color=[color[n] for n in nodes], cmap="tab10")
    if len(nodes) <= 30:
        nx.draw_networkx_labels(G, pos, ax=ax, labels={n: "".join(map(str, n)) for n in nodes}, font_size=6)
    ax.set_title(f"{title} ({len(nodes)} nodes, {len(comps)} components)")
    ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
