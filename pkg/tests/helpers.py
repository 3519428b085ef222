import numpy as np

from iqpool.attributes import AttributeMap, GrayImage, Polarity


def quality_map(values) -> AttributeMap:
    return AttributeMap(np.asarray(values, dtype=np.float64), Polarity.QUALITY, (-1.0, 1.0))


def distortion_map(values) -> AttributeMap:
    return AttributeMap(np.asarray(values, dtype=np.float64), Polarity.DISTORTION, (0.0, 255.0**2))


def random_map(rng: np.random.Generator, polarity: Polarity, max_side: int = 8) -> AttributeMap:
    h = int(rng.integers(1, max_side + 1))
    w = int(rng.integers(1, max_side + 1))
    values = rng.uniform(-1.0, 1.0, size=(h, w))
    if polarity is Polarity.DISTORTION:
        values = np.abs(values)  # distortion maps are nonnegative
        return distortion_map(values)
    return quality_map(values)


def random_image(rng: np.random.Generator, side: int) -> GrayImage:
    return GrayImage(rng.uniform(0.0, 255.0, size=(side, side)))
