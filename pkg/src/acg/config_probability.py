"""Probabilities and counts of small rooted configurations.

A configuration is a rooted subgraph grown one edge at a time: each
attachment either introduces a fresh node or closes a cycle onto an
existing one, with the edge oriented into ("in") or out of ("out") the
parent.  For trees the limiting probability of the grown node types,
conditional on the root's type, is a product of one conditional node
factor and one conditional edge factor per attachment.  Configurations
with cycles carry no limiting constant; their occurrence counts in
sampled graphs stay bounded as the graph grows, which is checked
empirically here.
"""

from dataclasses import dataclass

import numpy as np

from .degree_model import EdgeTypeDist, NodeTypeDist, conditional_dists
from .errors import NotATree

MAX_EMBED_EDGES = 4


@dataclass(frozen=True)
class Attachment:
    """One growth step: node attached to parent by an oriented edge.

    orientation "in" means the edge points from node into parent;
    "out" means it points from parent to node.  node_type is a (j, k)
    pair, or None to match any type when counting.
    """

    node: int
    parent: int
    orientation: str
    node_type: tuple | None = None

    def __post_init__(self):
        if self.orientation not in ("in", "out"):
            raise ValueError(f"orientation must be 'in' or 'out', got {self.orientation!r}")
        if self.node_type is not None:
            object.__setattr__(self, "node_type", (int(self.node_type[0]), int(self.node_type[1])))


@dataclass(frozen=True)
class ConfigurationTree:
    """Rooted configuration: root type plus an ordered attachment list.

    Node indices are canonical: the root is 0 and each attachment either
    names the next fresh index or revisits an existing one, which closes
    a cycle.  root_type is a (j, k) pair or None for a wildcard.
    """

    root_type: tuple | None
    attachments: tuple

    def __post_init__(self):
        if self.root_type is not None:
            object.__setattr__(self, "root_type", (int(self.root_type[0]), int(self.root_type[1])))
        object.__setattr__(self, "attachments", tuple(self.attachments))
        seen = 1
        for pos, att in enumerate(self.attachments):
            if not isinstance(att, Attachment):
                raise TypeError(f"attachment {pos} is not an Attachment")
            if not 0 <= att.parent < seen:
                raise ValueError(f"attachment {pos} names parent {att.parent} before it exists")
            if att.node == seen:
                seen += 1
            elif not 0 <= att.node < seen:
                raise ValueError(f"attachment {pos} names node {att.node} out of order")

    @property
    def n_edges(self) -> int:
        return len(self.attachments)

    @property
    def n_nodes(self) -> int:
        return 1 + max((a.node for a in self.attachments), default=0)

    @property
    def added_nodes(self) -> int:
        return len({a.node for a in self.attachments} - {0})

    @property
    def is_tree(self) -> bool:
        return all(a.node == pos + 1 for pos, a in enumerate(self.attachments))

    def node_types(self) -> list:
        """Type of each node index, None where only wildcards were given."""
        types = [self.root_type] + [None] * (self.n_nodes - 1)
        for att in self.attachments:
            if att.node_type is not None:
                if types[att.node] is not None and types[att.node] != att.node_type:
                    raise ValueError(f"node {att.node} given conflicting types")
                types[att.node] = att.node_type
        return types


def config_from_dict(d) -> ConfigurationTree:
    """Build a configuration from the JSON-friendly dict layout."""
    root = d.get("root")
    atts = [
        Attachment(
            node=int(a["node"]),
            parent=int(a["parent"]),
            orientation=a["edge"],
            node_type=None if a.get("type") is None else tuple(a["type"]),
        )
        for a in d.get("attachments", [])
    ]
    return ConfigurationTree(root_type=None if root is None else tuple(root), attachments=atts)


def config_to_dict(h: ConfigurationTree) -> dict:
    return {
        "root": None if h.root_type is None else list(h.root_type),
        "attachments": [
            {
                "node": a.node,
                "parent": a.parent,
                "edge": a.orientation,
                "type": None if a.node_type is None else list(a.node_type),
            }
            for a in h.attachments
        ],
    }


def _as_node_dist(p) -> NodeTypeDist:
    return p if isinstance(p, NodeTypeDist) else NodeTypeDist.from_weights(p)


def _as_edge_dist(q) -> EdgeTypeDist:
    return q if isinstance(q, EdgeTypeDist) else EdgeTypeDist.from_weights(q)


def two_node_edge_prob(p, q, target_type, source_type) -> float:
    """Joint type probability of one edge: source (j2, k2) -> target (j1, k1).

    Equals j1 k2 P[j1,k1] P[j2,k2] Q[k2,j1] / (z^2 Q+[k2] Q-[j1]); terms
    with a vanishing marginal carry no mass and give 0.
    """
    j1, k1 = target_type
    j2, k2 = source_type
    pd = _as_node_dist(p)
    qd = _as_edge_dist(q)
    z = pd.mean_degree
    if qd.out_marginal[k2] == 0 or qd.in_marginal[j1] == 0:
        return 0.0
    return float(
        j1
        * k2
        * pd.matrix[j1, k1]
        * pd.matrix[j2, k2]
        * qd.matrix[k2, j1]
        / (z**2 * qd.out_marginal[k2] * qd.in_marginal[j1])
    )


def tree_config_prob(h: ConfigurationTree, p, q) -> float:
    """Limiting probability of a tree configuration, given the root's type.

    Each attachment contributes one conditional node-type factor and one
    conditional edge factor: an in-edge at node m with parent m' gives
    P[j_m | k_m] Q[k_m | j_m'], an out-edge gives P[k_m | j_m] Q[j_m | k_m'].
    """
    if not h.is_tree:
        raise NotATree("configuration closes a cycle; no limiting tree probability")
    types = h.node_types()
    if any(t is None for t in types):
        raise ValueError("tree probabilities need every node type specified")
    cond = conditional_dists(_as_node_dist(p), _as_edge_dist(q))
    value = 1.0
    for att in h.attachments:
        j_m, k_m = types[att.node]
        j_p, k_p = types[att.parent]
        if att.orientation == "in":
            value *= cond.in_given_out[k_m, j_m] * cond.edge_out_given_in[j_p, k_m]
        else:
            value *= cond.out_given_in[j_m, k_m] * cond.edge_in_given_out[k_p, j_m]
    return value


def _branch_of(h: ConfigurationTree) -> list:
    """For each node index, the root-child branch it belongs to (root: 0)."""
    branch = [0] * h.n_nodes
    for att in h.attachments:
        branch[att.node] = att.node if att.parent == 0 else branch[att.parent]
    return branch


def lti_factorization(h: ConfigurationTree, root: int, p, q):
    """Split a tree at its root and check the two branches factorize.

    The split separates the branch through the first attached node from
    the rest; both halves are standalone configurations with the same
    root.  Returns (left, right, product) where product = left * right
    matches tree_config_prob(h) because the attachment factors of the
    two halves are disjoint.
    """
    if not h.is_tree:
        raise NotATree("factorization is defined for tree configurations")
    if root != 0:
        raise ValueError("the split point is the configuration root, index 0")
    branch = _branch_of(h)
    first = branch[1] if h.n_nodes > 1 else None

    def rebuild(keep):
        atts = [a for a in h.attachments if keep(branch[a.node])]
        index = {0: 0}
        renamed = []
        for a in atts:
            index[a.node] = len(index)
            renamed.append(
                Attachment(index[a.node], index[a.parent], a.orientation, a.node_type)
            )
        return ConfigurationTree(h.root_type, renamed)

    left_h = rebuild(lambda b: b == first)
    right_h = rebuild(lambda b: b != first)
    left = tree_config_prob(left_h, p, q) if left_h.n_edges else 1.0
    right = tree_config_prob(right_h, p, q) if right_h.n_edges else 1.0
    return left, right, left * right


def _adjacency(g):
    out_edges = [[] for _ in range(g.n_nodes)]
    in_edges = [[] for _ in range(g.n_nodes)]
    for eid in range(g.n_edges):
        out_edges[g.edge_src[eid]].append(eid)
        in_edges[g.edge_dst[eid]].append(eid)
    return out_edges, in_edges


def _type_matches(g, node, wanted) -> bool:
    return wanted is None or (
        g.in_degrees[node] == wanted[0] and g.out_degrees[node] == wanted[1]
    )


def count_config_occurrences(g, h: ConfigurationTree) -> int:
    """Number of embeddings of h in g, rooted anywhere, types matching.

    Distinct node indices of h map to distinct nodes of g, so tree
    embeddings never use self-loops; parallel edges count as separate
    embeddings because the edge map must be injective too.
    """
    if h.n_edges > MAX_EMBED_EDGES:
        raise ValueError(f"embedding search is limited to {MAX_EMBED_EDGES} edges")
    out_edges, in_edges = _adjacency(g)
    atts = h.attachments
    total = 0

    def extend(pos, mapping, used):
        nonlocal total
        if pos == len(atts):
            total += 1
            return
        att = atts[pos]
        parent = mapping[att.parent]
        fresh = att.node not in mapping
        if att.orientation == "in":
            candidates = in_edges[parent]
            far_end = g.edge_src
        else:
            candidates = out_edges[parent]
            far_end = g.edge_dst
        for eid in candidates:
            if eid in used:
                continue
            other = far_end[eid]
            if fresh:
                if other in mapping.values():
                    continue
                if not _type_matches(g, other, att.node_type):
                    continue
                mapping[att.node] = other
                used.add(eid)
                extend(pos + 1, mapping, used)
                used.discard(eid)
                del mapping[att.node]
            else:
                if other != mapping[att.node]:
                    continue
                used.add(eid)
                extend(pos + 1, mapping, used)
                used.discard(eid)

    wanted_root = h.root_type
    for root in range(g.n_nodes):
        if _type_matches(g, root, wanted_root):
            extend(0, {0: root}, set())
    return total


def edge_pair_fraction(g, target_type, source_type) -> float:
    """Fraction of edges whose endpoint types match (source -> target)."""
    if g.n_edges == 0:
        return 0.0
    j1, k1 = target_type
    j2, k2 = source_type
    src = g.edge_src
    dst = g.edge_dst
    mask = (
        (g.in_degrees[dst] == j1)
        & (g.out_degrees[dst] == k1)
        & (g.in_degrees[src] == j2)
        & (g.out_degrees[src] == k2)
    )
    return float(mask.sum() / g.n_edges)


@dataclass(frozen=True)
class ConfigCountReport:
    """Empirical occurrence summary of one configuration."""

    configuration: ConfigurationTree
    count: int
    graphs_scanned: int
    frequency: float
    predicted: float | None


def count_in_graphs(graphs, h: ConfigurationTree, p=None, q=None) -> ConfigCountReport:
    """Total and per-graph occurrence count of h over a graph collection."""
    graphs = list(graphs)
    count = sum(count_config_occurrences(g, h) for g in graphs)
    predicted = None
    if p is not None and q is not None and h.is_tree and h.n_edges:
        try:
            predicted = tree_config_prob(h, p, q)
        except ValueError:
            predicted = None
    return ConfigCountReport(
        configuration=h,
        count=count,
        graphs_scanned=len(graphs),
        frequency=count / len(graphs) if graphs else 0.0,
        predicted=predicted,
    )


@dataclass(frozen=True)
class ScalingReport:
    """Mean occurrence counts of a configuration across graph sizes."""

    sizes: tuple
    mean_counts: tuple
    ratio: float
    added_nodes: int
    n_edges: int


def cycle_order_estimate(h: ConfigurationTree, samples) -> ScalingReport:
    """Mean occurrences of h per graph at each sample size, plus the ratio.

    samples maps graph size N to a collection of sampled graphs.  For a
    configuration with more edges than added nodes the mean count stays
    bounded as N grows, so the ratio between the largest and smallest
    size hovers near 1; tree configurations instead scale with N.
    """
    sizes = sorted(samples)
    means = []
    for n in sizes:
        graphs = list(samples[n])
        counts = [count_config_occurrences(g, h) for g in graphs]
        means.append(float(np.mean(counts)) if counts else 0.0)
    ratio = means[-1] / means[0] if len(means) > 1 and means[0] > 0 else float("nan")
    return ScalingReport(
        sizes=tuple(sizes),
        mean_counts=tuple(means),
        ratio=ratio,
        added_nodes=h.added_nodes,
        n_edges=h.n_edges,
    )
