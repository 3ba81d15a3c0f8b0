"""Serialization of trees: the JSON tree schema and Newick with lengths.

JSON::

    {"planted": true,
     "nodes": [{"id": 0, "parent": null, "side": null, "len": 3.0},
               {"id": 1, "parent": 0, "side": "L", "len": 1.0},
               {"id": 2, "parent": 0, "side": "R", "len": 2.0}]}

Newick writes the root as the outermost group, so a planted tree is a
group with a single member::

    >>> to_newick(PlaneTree.from_nested((3.0, 1.0, 2.0)))
    '((:1.0,:2.0):3.0);'

Per-node annotations (masses, for instance) travel as ``[&...]``
comments in front of the length.
"""

import csv
import io
import re

from prunetree.exceptions import ExcursionError, InvalidTreeError
from prunetree.potential import Potential
from prunetree.pruning import DoubleMass, InteriorMass, MassTree, SingleMass
from prunetree.tree import (
    LEFT, RIGHT, PlaneTree, TreeBuilder, check_positive_lengths)


__all__ = ('tree_to_dict', 'tree_from_dict', 'to_newick', 'from_newick',
           'parse_newick', 'potential_from_dict', 'potential_to_dict',
           'mass_tree_to_dict', 'mass_tree_from_dict', 'excursion_to_csv',
           'trajectories_to_csv', 'table_to_csv')


def tree_to_dict(tree):
    return {
        'planted': tree.planted,
        'nodes': [{'id': node,
                   'parent': tree.nodes[node].parent,
                   'side': tree.side(node),
                   'len': tree.nodes[node].length}
                  for node in tree.preorder()],
    }


def tree_from_dict(data):
    try:
        entries = {int(e['id']): e for e in data['nodes']}
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTreeError('malformed tree document: %s' % e)

    children = {}
    for node, entry in entries.items():
        parent = entry.get('parent')
        if parent is not None and parent not in entries:
            raise InvalidTreeError('node %d has unknown parent %r' %
                                   (node, parent))
        children.setdefault(parent, []).append(node)

    roots = children.get(None, [])
    if bool(data.get('planted')) != (len(roots) == 1):
        raise InvalidTreeError(
            '"planted" is %r but the root has %d children' %
            (data.get('planted'), len(roots)))

    def ordered(kids):
        return sorted(kids, key=lambda n: entries[n].get('side') != LEFT)

    builder = TreeBuilder()
    stack = [(None, node) for node in reversed(ordered(roots))]
    seen = 0
    while stack:
        parent, node = stack.pop()
        seen += 1
        entry = entries[node]
        side = entry.get('side') if (parent is not None or
                                     len(roots) == 2) else None
        new = builder.add(parent, float(entry['len']), side)
        for kid in reversed(ordered(children.get(node, []))):
            stack.append((new, kid))
    if seen != len(entries):
        raise InvalidTreeError('tree document contains a cycle')
    tree, _ = builder.reduce()
    if len(tree) != len(entries):
        raise InvalidTreeError('tree document is not reduced binary')
    return check_positive_lengths(tree)


def _format_length(value):
    return repr(float(value))


def to_newick(tree, annotations=None):
    annotations = annotations or {}

    def decorate(node, text):
        note = annotations.get(node)
        if note:
            text += '[&%s]' % note
        return text + ':' + _format_length(tree.nodes[node].length)

    rendered = {}
    for node in tree.postorder():
        record = tree.nodes[node]
        if record.is_leaf:
            rendered[node] = decorate(node, '')
        else:
            rendered[node] = decorate(node, '(%s,%s)' % (
                rendered.pop(record.left), rendered.pop(record.right)))
    if tree.is_empty:
        return ';'
    return '(%s);' % ','.join(rendered[n] for n in tree.root_children)


_TOKEN = re.compile(r'\s*(\(|\)|,|;|\[[^\]]*\]|:[^,()\[\];]+|[^,()\[\]:;\s]+)')


def parse_newick(text):
    """Parse Newick text into ``(tree, annotations)``.

    Only binary trees with explicit lengths are accepted. Labels are
    ignored; ``[&...]`` comments are returned per node id.
    """
    groups = [[]]
    current = None
    position = 0
    text = text.strip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if not match:
            raise InvalidTreeError('cannot parse Newick at %d: %r' %
                                   (position, text[position:position + 10]))
        position = match.end()
        token = match.group(1)
        if token == '(':
            groups.append([])
            current = None
        elif token == ',':
            current = None
        elif token == ')':
            if len(groups) < 2:
                raise InvalidTreeError('unbalanced parenthesis in Newick')
            current = {'kids': groups.pop(), 'len': None, 'note': None}
            groups[-1].append(current)
        elif token == ';':
            break
        else:
            if current is None:
                current = {'kids': [], 'len': None, 'note': None}
                groups[-1].append(current)
            if token.startswith(':'):
                current['len'] = float(token[1:])
            elif token.startswith('['):
                current['note'] = token[1:-1].lstrip('&')
    if len(groups) != 1:
        raise InvalidTreeError('unbalanced parenthesis in Newick')

    top = groups[0]
    if not top:
        return PlaneTree.empty(), {}
    if len(top) != 1 or len(top[0]['kids']) > 2:
        raise InvalidTreeError('Newick root must hold one or two subtrees')
    roots = top[0]['kids']

    builder = TreeBuilder()
    notes = {}
    sides = [None] if len(roots) == 1 else [LEFT, RIGHT]
    stack = list(reversed([(None, item, side)
                           for item, side in zip(roots, sides)]))
    while stack:
        parent, item, side = stack.pop()
        if item['len'] is None:
            raise InvalidTreeError('Newick edge without a length')
        if len(item['kids']) not in (0, 2):
            raise InvalidTreeError('Newick tree is not binary')
        node = builder.add(parent, item['len'], side)
        if item['note']:
            notes[node] = item['note']
        if item['kids']:
            stack.append((node, item['kids'][1], RIGHT))
            stack.append((node, item['kids'][0], LEFT))
    # Builder ids are already in preorder, so notes keep their keys.
    return check_positive_lengths(builder.compact()), notes


def from_newick(text):
    return parse_newick(text)[0]


def potential_from_dict(data):
    """Read an initial potential from ``{"a": ..., "extrema": [...]}``."""
    try:
        extrema = tuple(float(v) for v in data['extrema'])
    except (KeyError, TypeError, ValueError) as e:
        raise ExcursionError('malformed potential document: %s' % e)
    return Potential(extrema, float(data.get('a', 0.0)))


def potential_to_dict(psi0):
    return {'a': psi0.a, 'b': psi0.b, 't': 0.0,
            'extrema': list(psi0.extrema),
            'positions': list(psi0.positions),
            'plateaus': [], 'sinks': []}


def _mass_to_dict(m):
    if isinstance(m, SingleMass):
        return {'mass': m.mass}
    return {'mass': m.total, 'mL': m.left, 'mR': m.right}


def mass_tree_to_dict(mt):
    data = tree_to_dict(mt.base)
    data['leaf_masses'] = {str(leaf): _mass_to_dict(m)
                           for leaf, m in sorted(mt.leaf_masses.items())}
    data['interior_masses'] = [
        {'edge': m.edge, 'offset': m.offset, 'mass': m.mass,
         'orientation': m.orientation} for m in mt.interior_masses]
    data['root_mass'] = mt.root_mass
    return data


def mass_tree_from_dict(data):
    base = tree_from_dict(data)
    leaf_masses = {}
    try:
        for leaf, m in data.get('leaf_masses', {}).items():
            if 'mL' in m:
                leaf_masses[int(leaf)] = DoubleMass(float(m['mL']),
                                                    float(m['mR']))
            else:
                leaf_masses[int(leaf)] = SingleMass(float(m['mass']))
        interior = tuple(
            InteriorMass(int(m['edge']), float(m['offset']),
                         float(m['mass']), m['orientation'])
            for m in data.get('interior_masses', ()))
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTreeError('malformed mass tree document: %s' % e)
    return MassTree(base, leaf_masses, interior, data.get('root_mass'))


EXCURSION_CSV_HEADER = ('t', 'value')
TRAJECTORY_CSV_HEADER = ('sink_id', 't', 'x', 'mass')


def _csv(header, rows):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def excursion_to_csv(ex):
    """Breakpoints of an excursion (or potential) as ``t,value`` rows."""
    return _csv(EXCURSION_CSV_HEADER,
                ((repr(t), repr(v)) for t, v in ex.breakpoints()))


def trajectories_to_csv(trajectories):
    rows = []
    for trajectory in trajectories:
        for t, x, mass in trajectory.breakpoints:
            rows.append((trajectory.sink_id, repr(t), repr(x), repr(mass)))
    return _csv(TRAJECTORY_CSV_HEADER, rows)


def table_to_csv(name, xs, values):
    """A formula evaluated on a grid, with the header ``x,<name>``."""
    return _csv(('x', name), ((repr(float(x)), repr(float(v)))
                              for x, v in zip(xs, values)))
