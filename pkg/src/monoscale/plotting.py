"""Top-down trajectory overlay as a standalone SVG plus a positions CSV."""

import numpy as np

from .io import atomic_write_text

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH = 800
HEIGHT = 600
MARGIN = 40


def _map_xz(positions, bounds):
    (x_lo, x_hi), (z_lo, z_hi) = bounds
    span_x = max(x_hi - x_lo, 1e-9)
    span_z = max(z_hi - z_lo, 1e-9)
    scale = min((WIDTH - 2 * MARGIN) / span_x, (HEIGHT - 2 * MARGIN) / span_z)
    px = MARGIN + (positions[:, 0] - x_lo) * scale
    # Flip so +z (forward) points up the page.
    py = HEIGHT - MARGIN - (positions[:, 2] - z_lo) * scale
    return px, py


def write_trajectory_plot(named_trajectories, svg_path, csv_path):
    """Write one polyline per trajectory (x-z plane) and a positions CSV.

    `named_trajectories` is a sequence of (label, Trajectory). The CSV holds
    every pose translation formatted losslessly, one row per pose.
    """
    named = [(str(label), traj) for label, traj in named_trajectories]
    if not named:
        raise ValueError("need at least one trajectory to plot")
    all_pos = np.vstack([traj.positions for _, traj in named])
    bounds = (
        (float(all_pos[:, 0].min()), float(all_pos[:, 0].max())),
        (float(all_pos[:, 2].min()), float(all_pos[:, 2].max())),
    )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    for i, (label, traj) in enumerate(named):
        color = PALETTE[i % len(PALETTE)]
        px, py = _map_xz(traj.positions, bounds)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{points}"/>'
        )
        parts.append(
            f'<text x="{MARGIN}" y="{MARGIN + 16 * i}" fill="{color}" '
            f'font-size="13" font-family="sans-serif">{label}</text>'
        )
    parts.append("</svg>")
    atomic_write_text(svg_path, "\n".join(parts) + "\n")

    lines = ["trajectory,frame,x,y,z"]
    for label, traj in named:
        for frame, pose in enumerate(traj):
            t = pose.t
            lines.append(
                f"{label},{frame},{t[0]:.17g},{t[1]:.17g},{t[2]:.17g}"
            )
    atomic_write_text(csv_path, "\n".join(lines) + "\n")


def read_positions_csv(path):
    """Parse the plot CSV back into {label: (N, 3) array}."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            label, _, x, y, z = line.split(",")
            out.setdefault(label, []).append([float(x), float(y), float(z)])
    return {k: np.array(v) for k, v in out.items()}
