"""Partially persistent ordered map: an AVL tree with path copying.

Every update returns a new root and leaves all older roots untouched, so each
root is a read-only version. Nodes also carry the value of the rightmost item
in their subtree, which lets a search find an item's in-order predecessor
without extra walks.
"""
from __future__ import annotations

from typing import Any, Callable, Iterator


class Node:
    __slots__ = ("key", "value", "left", "right", "height", "size", "last")

    def __init__(self, key, value, left: "Node | None", right: "Node | None"):
        self.key = key
        self.value = value
        self.left = left
        self.right = right
        self.height = 1 + max(_h(left), _h(right))
        self.size = 1 + _size(left) + _size(right)
        self.last = right.last if right is not None else value


def _h(n: Node | None) -> int:
    return n.height if n is not None else 0


def _size(n: Node | None) -> int:
    return n.size if n is not None else 0


def _balance(key, value, left, right) -> Node:
    hl, hr = _h(left), _h(right)
    if hl > hr + 1:
        if _h(left.left) >= _h(left.right):
            return Node(left.key, left.value, left.left, Node(key, value, left.right, right))
        lr = left.right
        return Node(lr.key, lr.value, Node(left.key, left.value, left.left, lr.left), Node(key, value, lr.right, right))
    if hr > hl + 1:
        if _h(right.right) >= _h(right.left):
            return Node(right.key, right.value, Node(key, value, left, right.left), right.right)
        rl = right.left
        return Node(rl.key, rl.value, Node(key, value, left, rl.left), Node(right.key, right.value, rl.right, right.right))
    return Node(key, value, left, right)


def insert(root: Node | None, key, value) -> Node:
    """New version with key -> value (replacing any existing value)."""
    if root is None:
        return Node(key, value, None, None)
    if key < root.key:
        return _balance(root.key, root.value, insert(root.left, key, value), root.right)
    if key > root.key:
        return _balance(root.key, root.value, root.left, insert(root.right, key, value))
    return Node(key, value, root.left, root.right)


def _pop_min(root: Node):
    if root.left is None:
        return root.key, root.value, root.right
    k, v, rest = _pop_min(root.left)
    return k, v, _balance(root.key, root.value, rest, root.right)


def delete(root: Node | None, key) -> Node | None:
    if root is None:
        raise KeyError(key)
    if key < root.key:
        return _balance(root.key, root.value, delete(root.left, key), root.right)
    if key > root.key:
        return _balance(root.key, root.value, root.left, delete(root.right, key))
    if root.left is None:
        return root.right
    if root.right is None:
        return root.left
    k, v, rest = _pop_min(root.right)
    return _balance(k, v, root.left, rest)


def items(root: Node | None) -> Iterator[tuple[Any, Any]]:
    stack = []
    n = root
    while stack or n is not None:
        while n is not None:
            stack.append(n)
            n = n.left
        n = stack.pop()
        yield n.key, n.value
        n = n.right


def search_last(root: Node | None, starts_before: Callable[[Any, Any], bool]):
    """Rightmost item whose start is at or before the query.

    ``starts_before(pred_value, value)`` decides whether the item holding
    ``value``, whose in-order predecessor holds ``pred_value`` (None for the
    first item), starts at or before the query. The predicate must be monotone
    along the order. Returns (value or None, probe count).
    """
    best = None
    pred_anc = None
    probes = 0
    n = root
    while n is not None:
        probes += 1
        pred = n.left.last if n.left is not None else pred_anc
        if starts_before(pred, n.value):
            best = n.value
            pred_anc = n.value
            n = n.right
        else:
            n = n.left
    return best, probes


def neighbors(root: Node | None, key):
    """(predecessor value, successor value) of key, None where absent."""
    pred = succ = None
    n = root
    while n is not None:
        if key < n.key:
            succ = n.value
            n = n.left
        elif key > n.key:
            pred = n.value
            n = n.right
        else:
            if n.left is not None:
                pred = n.left.last
            if n.right is not None:
                m = n.right
                while m.left is not None:
                    m = m.left
                succ = m.value
            break
    return pred, succ


def check(root: Node | None) -> int:
    """Verify ordering and balance; returns the height."""
    if root is None:
        return 0
    if root.left is not None and not root.left.key < root.key:
        raise AssertionError("order violated")
    if root.right is not None and not root.key < root.right.key:
        raise AssertionError("order violated")
    hl, hr = check(root.left), check(root.right)
    if abs(hl - hr) > 1 or root.height != 1 + max(hl, hr):
        raise AssertionError("balance violated")
    return root.height
