"""Minimal SVG output: trajectories as polylines and confidence ellipses."""
import numpy as np
from scipy.stats import chi2

COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def ellipse_axes(cov, level=0.67):
    """Semi-axes and rotation (degrees) of the ``level`` confidence ellipse
    of a 2-D Gaussian with covariance ``cov``."""
    w, V = np.linalg.eigh(0.5 * (np.asarray(cov) + np.asarray(cov).T))
    w = np.clip(w, 0.0, None)
    radius = np.sqrt(chi2.ppf(level, 2))
    angle = np.degrees(np.arctan2(V[1, 1], V[0, 1]))
    return radius * np.sqrt(w[1]), radius * np.sqrt(w[0]), angle


def beliefs_svg(path, truth, means, covs, level=0.67, window=None, size=(900, 500)):
    """Write trajectories and posterior ellipses to an SVG file.

    :param truth: ``(K + 1, N, 2)`` true positions
    :param means: ``(K, N, 2)`` posterior means for steps ``1..K``
    :param covs: ``(K, N, 2, 2)`` posterior position covariances
    :param window: optional ``(start, end)`` steps drawn with thicker ellipses
    """
    pts = np.concatenate([truth.reshape(-1, 2), means.reshape(-1, 2)])
    lo, hi = pts.min(axis=0) - 1.0, pts.max(axis=0) + 1.0
    W, H = size
    scale = min(W / (hi[0] - lo[0]), H / (hi[1] - lo[1]))

    def tx(p):
        return (p[0] - lo[0]) * scale, H - (p[1] - lo[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">']
    out.append(f'<rect width="{W}" height="{H}" fill="white"/>')
    for j in range(truth.shape[1]):
        colour = COLOURS[j % len(COLOURS)]
        line = " ".join("%.2f,%.2f" % tx(p) for p in truth[:, j])
        out.append(f'<polyline points="{line}" fill="none" stroke="{colour}" stroke-dasharray="4 3"/>')
        line = " ".join("%.2f,%.2f" % tx(p) for p in means[:, j])
        out.append(f'<polyline points="{line}" fill="none" stroke="{colour}"/>')
        for k in range(means.shape[0]):
            a, b, angle = ellipse_axes(covs[k, j], level)
            cx, cy = tx(means[k, j])
            width = 2.0 if window and window[0] <= k + 1 <= window[1] else 0.8
            out.append(
                f'<ellipse cx="{cx:.2f}" cy="{cy:.2f}" rx="{a * scale:.2f}" ry="{b * scale:.2f}" '
                f'transform="rotate({-angle:.2f} {cx:.2f} {cy:.2f})" fill="none" stroke="{colour}" stroke-width="{width}"/>'
            )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
