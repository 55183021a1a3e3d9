"""
Static SVG regret curves.
"""
from typing import *
import numpy as np
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

from .artifacts import regret_frame

COLORS = {'shared': '#1f77b4', 'independent': '#d62728', 'oracle': '#2ca02c'}


def plot_regret(traces, path: str, title: str = 'Cumulative shared regret') -> str:
    """
    Mean cumulative regret per algorithm with a min-max band over seeds.

    The SVG carries no date and a fixed hash salt so identical traces give
    identical bytes.
    """
    frame = regret_frame(traces)
    with matplotlib.rc_context({'svg.hashsalt': 'matrixrl', 'svg.fonttype': 'none'}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for algorithm, group in frame.groupby('algorithm', sort=True):
            curves = group.pivot(index='episode', columns='seed', values='cum_regret').sort_index()
            episodes = curves.index.to_numpy()
            values = curves.to_numpy()
            color = COLORS.get(algorithm)
            ax.plot(episodes, values.mean(axis=1), label=algorithm, color=color, linewidth=1.5)
            ax.fill_between(episodes, values.min(axis=1), values.max(axis=1), color=color, alpha=0.2, linewidth=0)
        ax.set_xlabel('Episode')
        ax.set_ylabel('Cumulative regret')
        ax.set_title(title)
        if len(frame):
            ax.legend(loc='upper left')
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    return path
