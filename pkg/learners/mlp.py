"""
Fully-connected regressor trained with Adam on squared error
"""

from typing import List, Sequence

import numpy as np
import torch
import torch.nn as nn
import torch.optim as optim

from .base import FittedOutcomeModel


def build_network(n_inputs: int, hidden: Sequence[int]) -> nn.Sequential:
    layers: List[nn.Module] = []
    width = n_inputs
    for units in hidden:
        layers += [nn.Linear(width, units), nn.Tanh()]
        width = units
    layers.append(nn.Linear(width, 1))
    return nn.Sequential(*layers).double()


def _standardise(values: np.ndarray):
    mean = values.mean(axis=0)
    scale = values.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def train_network(X: np.ndarray, y: np.ndarray, hidden: Sequence[int], learning_rate: float,
                  epochs: int, batch_size: int, seed: int):
    """Returns (net, x_mean, x_scale, y_mean, y_scale)"""
    torch.manual_seed(seed)
    shuffler = torch.Generator().manual_seed(seed)

    x_mean, x_scale = _standardise(X)
    y_mean = float(y.mean())
    y_scale = float(y.std()) or 1.0

    xt = torch.tensor((X - x_mean) / x_scale, dtype=torch.float64)
    yt = torch.tensor(((y - y_mean) / y_scale).reshape(-1, 1), dtype=torch.float64)

    net = build_network(X.shape[1], hidden)
    criterion = nn.MSELoss()
    opt = optim.Adam(net.parameters(), lr=learning_rate)

    n = len(xt)
    for _ in range(epochs):
        order = torch.randperm(n, generator=shuffler)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            opt.zero_grad()
            loss = criterion(net(xt[batch]), yt[batch])
            loss.backward()
            opt.step()
    net.eval()
    return net, x_mean, x_scale, y_mean, y_scale


class MlpOutcomeModel(FittedOutcomeModel):
    family = "MLP"

    def __init__(self, nets: List[nn.Sequential], x_mean: List[np.ndarray], x_scale: List[np.ndarray],
                 y_mean: List[float], y_scale: List[float], per_level: bool,
                 n_levels: int, p_u: int, p_z: int, hidden: Sequence[int]):
        super().__init__(n_levels, p_u, p_z)
        self.nets = nets
        self.x_mean = [np.asarray(m, dtype=float) for m in x_mean]
        self.x_scale = [np.asarray(s, dtype=float) for s in x_scale]
        self.y_mean = [float(m) for m in y_mean]
        self.y_scale = [float(s) for s in y_scale]
        self.per_level = bool(per_level)
        self.hidden = list(hidden)

    def _run(self, k: int, design: np.ndarray) -> np.ndarray:
        xt = torch.tensor((design - self.x_mean[k]) / self.x_scale[k], dtype=torch.float64)
        with torch.no_grad():
            out = self.nets[k](xt).numpy().reshape(-1)
        return out * self.y_scale[k] + self.y_mean[k]

    def _predict_level(self, level, features):
        if self.per_level:
            return self._run(level, features)
        design = np.column_stack([features, np.full(len(features), float(level))])
        return self._run(0, design)

    def to_dict(self) -> dict:
        return {
            'family': self.family,
            'per_level': self.per_level,
            'n_levels': self.n_levels,
            'p_u': self.p_u,
            'p_z': self.p_z,
            'hidden': self.hidden,
            'x_mean': [m.tolist() for m in self.x_mean],
            'x_scale': [s.tolist() for s in self.x_scale],
            'y_mean': self.y_mean,
            'y_scale': self.y_scale,
            'state': [
                {name: tensor.tolist() for name, tensor in net.state_dict().items()}
                for net in self.nets
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpOutcomeModel":
        nets = []
        for x_mean, state in zip(data['x_mean'], data['state']):
            net = build_network(len(x_mean), data['hidden'])
            net.load_state_dict({k: torch.tensor(v, dtype=torch.float64) for k, v in state.items()})
            net.eval()
            nets.append(net)
        return cls(nets, data['x_mean'], data['x_scale'], data['y_mean'], data['y_scale'],
                   data['per_level'], data['n_levels'], data['p_u'], data['p_z'], data['hidden'])
