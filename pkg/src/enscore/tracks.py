"""Challenge track geometries.

A track fixes how many high-resolution frames a cube carries, where the
context/target boundary sits, and how the trend subscore windows the
target series. Four tracks exist:

====================  =======  ======  ==========
track                 context  target  OLS window
====================  =======  ======  ==========
iid                        10      20          20
ood                        10      20          20
extreme                    20      40          40
seasonal                   70     140          20
====================  =======  ======  ==========

The seasonal track fits trend slopes over disjoint 20-frame windows;
all other tracks use a single window covering the whole target series.
"""

from __future__ import annotations

from dataclasses import dataclass

MESO_STEPS_PER_FRAME = 5  # daily meteorology vs. 5-daily imagery


@dataclass(frozen=True)
class TrackSpec:
    name: str
    context_frames: int
    target_frames: int
    ols_window: int

    def __post_init__(self):
        if self.target_frames % self.ols_window != 0:
            raise ValueError(
                f"target_frames={self.target_frames} not a multiple of "
                f"ols_window={self.ols_window}"
            )

    @property
    def hires_frames(self) -> int:
        return self.context_frames + self.target_frames

    @property
    def meso_frames(self) -> int:
        return MESO_STEPS_PER_FRAME * self.hires_frames

    def windows(self) -> list[tuple[int, int]]:
        """Disjoint contiguous [start, stop) ranges over the target frames."""
        w = self.ols_window
        return [(i, i + w) for i in range(0, self.target_frames, w)]


TRACKS: dict[str, TrackSpec] = {
    "iid": TrackSpec("iid", 10, 20, 20),
    "ood": TrackSpec("ood", 10, 20, 20),
    "extreme": TrackSpec("extreme", 20, 40, 40),
    "seasonal": TrackSpec("seasonal", 70, 140, 20),
}


def get_track(name: str) -> TrackSpec:
    try:
        return TRACKS[name]
    except KeyError:
        raise KeyError(f"unknown track {name!r}; expected one of {sorted(TRACKS)}") from None
