from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Tuple


class BroadcastTree(object):
    """Spanning tree rooted at the client whose model it carries.

    ``parent[v]`` is ``None`` only for the root. A transmitter is a node with at
    least one child; ``transmitters`` lists them in breadth-first hop order
    (children visited in ascending id). The broadcast group of a transmitter
    is its children unless ``groups`` overrides it (flood fill broadcasts to
    every neighbour).
    """

    __slots__ = ("root", "parent", "children", "transmitters", "_groups")

    def __init__(self, root: int, parent: Sequence[Optional[int]], groups: Optional[Dict[int, Iterable[int]]] = None):
        n = len(parent)
        if not 0 <= root < n:
            raise ValueError(f"root {root} out of range for {n} nodes")
        if parent[root] is not None:
            raise ValueError(f"root {root} must not have a parent")
        children = [[] for _ in range(n)]
        for v, p in enumerate(parent):
            if v == root:
                continue
            if p is None:
                raise ValueError(f"node {v} has no parent but is not the root")
            if not 0 <= p < n or p == v:
                raise ValueError(f"node {v} has invalid parent {p}")
            children[p].append(v)

        order = []
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            queue.extend(children[u])
        if len(order) != n:
            raise ValueError("parent links contain a cycle or do not reach every node")

        self.root = int(root)
        self.parent = tuple(None if p is None else int(p) for p in parent)
        self.children = tuple(tuple(c) for c in children)
        self.transmitters = tuple(u for u in order if children[u])
        self._groups = None
        if groups is not None:
            senders = set(self.transmitters)
            self._groups = {int(i): tuple(sorted(set(g))) for i, g in groups.items() if i in senders}

    @property
    def num_nodes(self) -> int:
        return len(self.parent)

    def group(self, i: int) -> Tuple[int, ...]:
        if self._groups is not None and i in self._groups:
            return self._groups[i]
        return self.children[i]

    @property
    def has_group_override(self) -> bool:
        return self._groups is not None

    def depth(self) -> List[int]:
        depth = [0] * self.num_nodes
        for u in self.hop_order():
            if u != self.root:
                depth[u] = depth[self.parent[u]] + 1
        return depth

    def hop_order(self) -> List[int]:
        order = []
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            order.append(u)
            queue.extend(self.children[u])
        return order

    def descendants(self, i: int) -> List[int]:
        out = []
        stack = list(self.children[i])
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return sorted(out)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted((min(v, p), max(v, p)) for v, p in enumerate(self.parent) if p is not None)

    def validate(self, topology):
        """Raise ``ValueError`` unless every parent link and group member is a topology edge."""
        if topology.n != self.num_nodes:
            raise ValueError(f"tree spans {self.num_nodes} nodes, topology has {topology.n}")
        for v, p in enumerate(self.parent):
            if p is not None and not topology.has_edge(v, p):
                raise ValueError(f"parent link ({p}, {v}) is not a topology edge")
        for i in self.transmitters:
            for j in self.group(i):
                if not topology.has_edge(i, j):
                    raise ValueError(f"broadcast group of {i} contains non-neighbour {j}")

    @classmethod
    def from_parents(cls, root: int, parent: Sequence[Optional[int]], groups=None) -> "BroadcastTree":
        return cls(root, parent, groups=groups)

    @classmethod
    def from_edges(cls, n: int, root: int, edges: Iterable[Tuple[int, int]]) -> "BroadcastTree":
        """Root an undirected edge set at ``root`` by breadth-first search."""
        adj = [[] for _ in range(n)]
        for i, j in edges:
            adj[i].append(j)
            adj[j].append(i)
        parent = [None] * n
        seen = [False] * n
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if not seen[v]:
                    seen[v] = True
                    parent[v] = u
                    queue.append(v)
        if not all(seen):
            raise ValueError("edge set does not span all nodes")
        return cls(root, parent)

    def to_dict(self) -> Dict:
        out = {
            "root": self.root,
            "parent": list(self.parent),
            "transmitters": list(self.transmitters),
        }
        if self._groups is not None:
            out["groups"] = {str(i): list(g) for i, g in sorted(self._groups.items())}
        return out

    def __eq__(self, other):
        if not isinstance(other, BroadcastTree):
            return NotImplemented
        return (
            self.root == other.root
            and self.parent == other.parent
            and all(self.group(i) == other.group(i) for i in range(self.num_nodes))
        )

    def __hash__(self):
        return hash((self.root, self.parent))

    def __repr__(self):
        return f"BroadcastTree(root={self.root}, transmitters={list(self.transmitters)})"
