"""Static SVG drawings of shock trees.

Only the geometry computed by :class:`~prunetree.annihilation.ShockTree`
is drawn: one ``<polyline>`` per segment and a marker at every node.
"""

from prunetree.exceptions import DomainError


__all__ = ('render_svg', 'VIEWS')


VIEWS = ('phase', 'space-time')

HEADER = ('<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
          'width="%d" height="%d" viewBox="0 0 %d %d">')
POLYLINE = ('<polyline points="%s" fill="none" stroke="%s" '
            'stroke-width="%s"/>')
MARKER = '<circle cx="%s" cy="%s" r="%s" fill="%s"/>'


def _fmt(value):
    return ('%.3f' % value).rstrip('0').rstrip('.')


def render_svg(st, view='phase', width=800, height=400, margin=20,
               stroke='#1f4e79', stroke_width=1.5):
    """Render the shock tree ``st`` as an SVG document.

    ``view`` is ``'phase'`` for the drawing in the ``(x, psi)`` plane,
    with the potential itself in grey underneath, or ``'space-time'``
    for the sink world lines with time running upwards.
    """
    if view == 'phase':
        segments = st.phase_space_segments()
        background = [tuple(st.psi0.breakpoints())]
    elif view == 'space-time':
        segments = st.space_time_segments()
        background = []
    else:
        raise DomainError('unknown view %r, expected one of %s' %
                          (view, ', '.join(VIEWS)))

    points = [p for line in segments + background for p in line]
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (width - 2 * margin) / ((x1 - x0) or 1.0)
    sy = (height - 2 * margin) / ((y1 - y0) or 1.0)

    def project(point):
        x, y = point
        # SVG's y axis points down.
        return (margin + (x - x0) * sx, height - margin - (y - y0) * sy)

    def polyline(line, colour, width_):
        coords = ' '.join('%s,%s' % tuple(map(_fmt, project(p)))
                          for p in line)
        return POLYLINE % (coords, colour, _fmt(width_))

    lines = [HEADER % (width, height, width, height)]
    for line in background:
        lines.append(polyline(line, '#bbbbbb', 1))
    for segment in segments:
        lines.append(polyline(segment, stroke, stroke_width))
    for segment in segments:
        x, y = project(segment[0])
        lines.append(MARKER % (_fmt(x), _fmt(y), 2, stroke))
    lines.append('</svg>')
    return '\n'.join(lines) + '\n'
