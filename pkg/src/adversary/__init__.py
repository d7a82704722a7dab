"""Poisoning attacks and malicious-server tamper injection."""

from src.adversary.attacks import (
    ATTACK_REGISTRY,
    BaseAttack,
    build_attack,
    dpfl_adaptive,
    krum_attack,
    label_flip,
    scaling_attack,
    trim_attack,
)
from src.adversary.models import AttackKind, AttackSpec, ServerTamperSpec, TamperTarget, select_malicious
from src.adversary.tamper import server_tamper

__all__ = [
    "ATTACK_REGISTRY",
    "BaseAttack",
    "build_attack",
    "dpfl_adaptive",
    "krum_attack",
    "label_flip",
    "scaling_attack",
    "trim_attack",
    "AttackKind",
    "AttackSpec",
    "ServerTamperSpec",
    "TamperTarget",
    "select_malicious",
    "server_tamper",
]
