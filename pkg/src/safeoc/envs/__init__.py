from .cartpole import CartPoleEnv, cartpole_step
from .fourrooms import ACTION_LETTERS, FourRoomsEnv, fourrooms_reset, fourrooms_step
from .gridmap import GridMap, default_map, load_map, parse_map
from .tiles import TileCoder, tile_encode

__all__ = [
    "ACTION_LETTERS",
    "CartPoleEnv",
    "FourRoomsEnv",
    "GridMap",
    "TileCoder",
    "cartpole_step",
    "default_map",
    "fourrooms_reset",
    "fourrooms_step",
    "load_map",
    "parse_map",
    "tile_encode",
]
