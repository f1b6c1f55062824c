"""Regenerate the bundled scene and camera-path files under src/frameless/assets."""

import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "frameless" / "assets"

SPHERES = """\
light dir=0.5,0.8,0.6 intensity=0.7 ambient=0.3
background 0.12,0.16,0.25
# ground
sphere r=100 albedo=0.55,0.5,0.45 spec=0 key t=0 c=0,-101,0
sphere r=1.0 albedo=0.9,0.2,0.15 spec=0.15 key t=0 c=0,0,0
sphere r=0.6 albedo=0.2,0.7,0.25 spec=0.1 key t=0 c=1.8,-0.4,0.6
sphere r=0.5 albedo=0.2,0.3,0.9 spec=0.2 key t=0 c=-1.6,-0.5,1.0
sphere r=0.7 albedo=0.95,0.85,0.2 spec=0.0 key t=0 c=-0.9,-0.3,-1.9
sphere r=0.35 albedo=0.9,0.9,0.9 spec=0.3 key t=0 c=0.9,-0.65,1.8
sphere r=0.45 albedo=0.7,0.25,0.8 spec=0.1 key t=0 c=2.1,-0.55,-1.4
"""

HOME = "eye=0,1.8,6 look=0,-0.2,0 up=0,1,0 vfov=45"
DT = 1 / 30


def orbit_key(t, deg_per_s, t0=0.0):
    a = math.radians(deg_per_s * (t - t0))
    return (f"t={t:.6f} eye={6 * math.sin(a):.6f},1.8,{6 * math.cos(a):.6f} "
            f"look=0,-0.2,0 up=0,1,0 vfov=45")


def keys(t_end):
    return [k * DT for k in range(int(round(t_end / DT)) + 1)]


def write(name, text):
    (OUT / name).write_text(text, encoding="utf-8")


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    write("orbit.scene", "# static spheres on a ground sphere\n" + SPHERES)
    write("orbit.path", "# camera circles the scene at 90 deg/s, 4 s\n"
          + "\n".join(orbit_key(t, 90.0) for t in keys(4.0)) + "\n")

    circle = " ".join(
        f"key t={t:.6f} c={2.3 * math.sin(math.radians(90 * t)):.6f},0.25,"
        f"{2.3 * math.cos(math.radians(90 * t)):.6f}" for t in keys(4.0))
    write("flyby.scene", "# white sphere circling the others at 90 deg/s\n" + SPHERES
          + f"sphere r=0.55 albedo=0.95,0.95,0.95 spec=0.25 {circle}\n")
    write("flyby.path", "# fixed camera\nt=0 " + HOME + "\n")

    write("stop.scene", "# same static spheres as orbit\n" + SPHERES)
    write("stop.path", "# 90 deg/s orbit that halts at t = 2 s, then holds\n"
          + "\n".join(orbit_key(t, 90.0, t0=2.0) for t in keys(2.0)) + "\n")

    # camera cut a quarter refresh after t = 0.5 at 60 Hz
    te = 0.5 + 0.25 / 60
    write("jump.scene", "# static spheres, used with the jump path\n" + SPHERES)
    write("jump.path", "# hold, then a hard cut to a side view\n"
          f"t=0 {HOME}\n"
          f"t={te:.9f} {HOME}\n"
          f"t={te + 1e-6:.9f} eye=6,1.8,0 look=0,-0.2,0 up=0,1,0 vfov=45\n")

    write("edge.scene", "# white half-plane left of x=0 facing the camera, black elsewhere\n"
          "light dir=0,0,1 intensity=0 ambient=1\n"
          "background 0,0,0\n"
          "triangle v0=-50,-50,0 v1=0,-50,0 v2=0,50,0 albedo=1,1,1\n"
          "triangle v0=-50,-50,0 v1=0,50,0 v2=-50,50,0 albedo=1,1,1\n")
    write("edge.path", "# head-on, the edge runs down the image center\n"
          "t=0 eye=0,0,5 look=0,0,0 up=0,1,0 vfov=40\n")


if __name__ == "__main__":
    main()
