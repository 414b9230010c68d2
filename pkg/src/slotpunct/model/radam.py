"""Rectified Adam.

Adam whose adaptive step is switched on only once the variance of the
adaptive learning rate is tractable (``rho_t > threshold``), and scaled by the
rectification term ``r_t`` afterwards. Before that the update is bias-corrected
momentum SGD. ``threshold=4`` is the published rule; ``torch.optim.RAdam``
uses 5.
"""

from __future__ import annotations

import math

import torch
from torch.optim import Optimizer


class RAdam(Optimizer):
    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0, threshold=4.0):
        if lr < 0:
            raise ValueError(f"invalid learning rate {lr}")
        if not 0.0 <= betas[0] < 1.0 or not 0.0 <= betas[1] < 1.0:
            raise ValueError(f"invalid betas {betas}")
        if threshold < 4.0:
            raise ValueError("the rectification term is undefined for rho_t <= 4")
        defaults = dict(lr=lr, betas=betas, eps=eps, weight_decay=weight_decay, threshold=threshold)
        super().__init__(params, defaults)

    @staticmethod
    def rectification(step: int, beta2: float) -> tuple[float, float]:
        """Return ``(rho_t, r_t)``; ``r_t`` is nan while ``rho_t <= 4``."""
        rho_inf = 2.0 / (1.0 - beta2) - 1.0
        b2t = beta2**step
        rho_t = rho_inf - 2.0 * step * b2t / (1.0 - b2t)
        if rho_t <= 4.0:
            return rho_t, math.nan
        r = math.sqrt((rho_t - 4) * (rho_t - 2) * rho_inf / ((rho_inf - 4) * (rho_inf - 2) * rho_t))
        return rho_t, r

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()

        for group in self.param_groups:
            beta1, beta2 = group["betas"]
            lr = group["lr"]
            eps = group["eps"]
            wd = group["weight_decay"]
            for p in group["params"]:
                if p.grad is None:
                    continue
                grad = p.grad
                if wd:
                    grad = grad.add(p, alpha=wd)
                state = self.state[p]
                if not state:
                    state["step"] = 0
                    state["exp_avg"] = torch.zeros_like(p)
                    state["exp_avg_sq"] = torch.zeros_like(p)
                state["step"] += 1
                t = state["step"]
                m, v = state["exp_avg"], state["exp_avg_sq"]
                m.mul_(beta1).add_(grad, alpha=1 - beta1)
                v.mul_(beta2).addcmul_(grad, grad, value=1 - beta2)

                m_hat = m / (1 - beta1**t)
                rho_t, r = self.rectification(t, beta2)
                if rho_t > group["threshold"]:
                    adaptive = math.sqrt(1 - beta2**t) / (v.sqrt() + eps)
                    p.add_(m_hat * adaptive, alpha=-lr * r)
                else:
                    p.add_(m_hat, alpha=-lr)
        return loss
