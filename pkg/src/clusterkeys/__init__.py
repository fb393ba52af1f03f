"""Cluster-based pairwise key management simulator for wireless sensor networks."""

from .cluster import Clustering, assign_points, kmeanspp, objective, seed_centers, update_means
from .deploy import Deployment, Position, distance, generate_deployment
from .errors import (ClusteringError, ClusterKeysError, ConfigError, ControllerDisconnected,
                     DeadEnd, GreedyTailFailure, LoopGuard, RouteFailure)
from .keys import (ControllerKeyGraph, KeyId, KeyShareGraph, birthday_probability,
                   controller_range_graph, distribute_controller_keys, distribute_node_keys,
                   exact_birthday_probability, key_set_size, pool_size)
from .route import (Controller, Network, PathCache, RoutePath, controller_paths,
                    greedy_route, inter_cluster_route, route)
from .sim import MetricsRecord, SimConfig, aggregate, run_experiment, run_trial, write_csv

__version__ = "0.1.0"
