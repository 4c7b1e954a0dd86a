"""Minimal dense network engine."""
from .adam import Adam
from .checkpoint import load_net, net_from_dict, net_to_dict, save_net
from .dense import DenseNet, sigmoid, soft_update, softmax
from .gradcheck import check_gradients

__all__ = ["Adam", "DenseNet", "check_gradients", "load_net", "net_from_dict", "net_to_dict",
           "save_net", "sigmoid", "soft_update", "softmax"]
