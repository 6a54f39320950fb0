#!/usr/bin/env python3
"""Regenerates the scenario fixtures under fixtures/scenarios and fixtures/faulty.

Each scenario is a directory with events.getevent (device clock timestamps),
dumps/NNN.xml and screens/NNN.png (one per detected action, in order),
sensors.txt and device.json. Output is deterministic.
"""
import json
import os
import shutil

from PIL import Image, ImageDraw

ROOT = os.path.dirname(os.path.abspath(__file__))
W, H = 1080, 1920
EPOCH_S = 1000.0
EPOCH_US = int(EPOCH_S * 1_000_000)
TOUCH, KEYS = 1, 2


def raw_for(px, dim, raw_max):
    """Smallest raw value that maps back onto pixel px."""
    for raw in range(raw_max + 1):
        if round(raw * (dim - 1) / raw_max) == px:
            return raw
    raise ValueError(px)


class Log:
    def __init__(self, raw_max=None):
        self.lines = [
            "add device 1: /dev/input/event1",
            '  name:     "virtio_input_multi_touch_1"',
            "add device 2: /dev/input/event2",
            '  name:     "gpio-keys"',
        ]
        self.raw_max = raw_max
        self.slot = 0
        self.count = 0

    def ev(self, t, dev, ty, code, value):
        sec = int(t)
        usec = round((t - sec) * 1_000_000)
        self.lines.append(f"[{sec:8d}.{usec:06d}] /dev/input/event{dev}: {ty:04x} {code:04x} {value & 0xffffffff:08x}")
        self.count += 1

    def xy(self, x, y):
        if self.raw_max is None:
            return x, y
        return raw_for(x, W, self.raw_max), raw_for(y, H, self.raw_max)

    def syn(self, t):
        self.ev(t, TOUCH, 0, 0, 0)

    def select(self, t, slot):
        if slot != self.slot:
            self.ev(t, TOUCH, 3, 0x2F, slot)
            self.slot = slot

    def down(self, t, slot, tid, x, y, first=True):
        self.select(t, slot)
        rx, ry = self.xy(x, y)
        self.ev(t, TOUCH, 3, 0x39, tid)
        self.ev(t, TOUCH, 3, 0x35, rx)
        self.ev(t, TOUCH, 3, 0x36, ry)
        self.ev(t, TOUCH, 3, 0x3A, 0x81)
        if first:
            self.ev(t, TOUCH, 1, 0x14A, 1)

    def move(self, t, slot, x, y):
        self.select(t, slot)
        rx, ry = self.xy(x, y)
        self.ev(t, TOUCH, 3, 0x35, rx)
        self.ev(t, TOUCH, 3, 0x36, ry)

    def up(self, t, slot, last=True):
        self.select(t, slot)
        self.ev(t, TOUCH, 3, 0x39, -1)
        if last:
            self.ev(t, TOUCH, 1, 0x14A, 0)

    def tap(self, t, tid, x, y, dur=0.08):
        self.down(t, 0, tid, x, y)
        self.syn(t)
        self.up(t + dur, 0)
        self.syn(t + dur)

    def swipe(self, t, tid, a, b, dur, steps=6):
        self.down(t, 0, tid, *a)
        self.syn(t)
        for i in range(1, steps + 1):
            f = i / steps
            ti = t + dur * f
            self.move(ti, 0, round(a[0] + (b[0] - a[0]) * f), round(a[1] + (b[1] - a[1]) * f))
            self.syn(ti)
        self.up(t + dur, 0)
        self.syn(t + dur)

    def hold(self, t, tid, x, y, dur):
        self.down(t, 0, tid, x, y)
        self.syn(t)
        # finger jitter well inside the slop
        self.move(t + dur / 2, 0, x + 3, y + 2)
        self.syn(t + dur / 2)
        self.up(t + dur, 0)
        self.syn(t + dur)

    def key(self, t, code, dur=0.08):
        self.ev(t, KEYS, 1, code, 1)
        self.ev(t, KEYS, 0, 0, 0)
        self.ev(t + dur, KEYS, 1, code, 0)
        self.ev(t + dur, KEYS, 0, 0, 0)

    def text(self):
        return "\n".join(self.lines) + "\n"


def node(cls, bounds, text="", rid="", clickable=False, children=(), pkg="com.example.notes"):
    l, t, r, b = bounds
    attrs = (
        f'index="0" text="{text}" resource-id="{rid}" class="{cls}" package="{pkg}" '
        f'content-desc="" checkable="false" checked="false" clickable="{str(clickable).lower()}" '
        f'enabled="true" focusable="{str(clickable).lower()}" focused="false" scrollable="false" '
        f'long-clickable="false" password="false" selected="false" bounds="[{l},{t}][{r},{b}]"'
    )
    if not children:
        return f"<node {attrs} />"
    return f"<node {attrs}>" + "".join(children) + "</node>"


def hierarchy(*roots):
    return "<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>" f'<hierarchy rotation="0">{"".join(roots)}</hierarchy>\n'


def login_screen():
    return hierarchy(
        node("android.widget.FrameLayout", (0, 0, W, H), children=[
            node("android.widget.LinearLayout", (0, 66, W, H), children=[
                node("android.widget.TextView", (60, 200, 1020, 300), text="Notes", rid="com.example.notes:id/title"),
                node("android.widget.EditText", (60, 400, 1020, 520), text="Email", rid="com.example.notes:id/email", clickable=True),
                node("android.widget.EditText", (60, 560, 1020, 680), text="Password", rid="com.example.notes:id/password", clickable=True),
                node("android.widget.Button", (440, 900, 640, 1020), text="OK", rid="com.example.notes:id/ok", clickable=True),
            ]),
        ])
    )


def list_screen():
    rows = [
        node("android.widget.LinearLayout", (0, 240 + 200 * i, W, 440 + 200 * i), rid="com.example.notes:id/row", clickable=True, children=[
            node("android.widget.TextView", (40, 280 + 200 * i, 1040, 400 + 200 * i), text=f"Note {i + 1}", rid="com.example.notes:id/note_title"),
        ])
        for i in range(8)
    ]
    return hierarchy(
        node("android.widget.FrameLayout", (0, 0, W, H), children=[
            node("android.widget.TextView", (0, 66, W, 240), text="All notes", rid="com.example.notes:id/toolbar_title"),
            node("androidx.recyclerview.widget.RecyclerView", (0, 240, W, 1840), rid="com.example.notes:id/list", children=rows),
        ])
    )


def screenshot(label, boxes):
    img = Image.new("RGB", (W // 10, H // 10), (250, 250, 250))
    d = ImageDraw.Draw(img)
    d.rectangle((0, 0, W // 10, 6), fill=(40, 80, 160))
    for (l, t, r, b) in boxes:
        d.rectangle((l // 10, t // 10, r // 10 - 1, b // 10 - 1), outline=(90, 90, 90), fill=(220, 230, 245))
    d.text((4, H // 10 - 14), label, fill=(0, 0, 0))
    return img


LOGIN_BOXES = [(60, 200, 1020, 300), (60, 400, 1020, 520), (60, 560, 1020, 680), (440, 900, 640, 1020)]
LIST_BOXES = [(0, 240 + 200 * i, W, 440 + 200 * i) for i in range(8)]


def device(raw_max=None, started="2026-03-02T10:15:00Z"):
    xm = raw_max if raw_max is not None else W - 1
    ym = raw_max if raw_max is not None else H - 1
    return {
        "model": "sdk_gphone64_x86_64",
        "os_version": "14",
        "screen_width": W,
        "screen_height": H,
        "axis_ranges": {"x_min": 0, "x_max": xm, "y_min": 0, "y_max": ym, "screen_width": W, "screen_height": H},
        "epoch_us": int(EPOCH_S * 1_000_000),
        "started_at": started,
        "app_package": "com.example.notes",
        "packages": ["com.android.settings", "com.example.notes", "com.google.android.apps.maps"],
    }


def write(base, name, log, screens, sensors="", dev=None, missing_screens=()):
    d = os.path.join(base, name)
    shutil.rmtree(d, ignore_errors=True)
    os.makedirs(os.path.join(d, "dumps"))
    os.makedirs(os.path.join(d, "screens"))
    with open(os.path.join(d, "events.getevent"), "w") as f:
        f.write(log.text())
    for i, (xml, img) in enumerate(screens):
        with open(os.path.join(d, "dumps", f"{i:03d}.xml"), "w") as f:
            f.write(xml)
        if i not in missing_screens:
            img.save(os.path.join(d, "screens", f"{i:03d}.png"), optimize=True)
    with open(os.path.join(d, "sensors.txt"), "w") as f:
        f.write(sensors)
    with open(os.path.join(d, "device.json"), "w") as f:
        json.dump(dev or device(), f, indent=2)
        f.write("\n")


def accel(t0, t1, step):
    out = []
    t = t0
    i = 0
    while t <= t1:
        out.append(f"accelerometer {EPOCH_US + t} 0.{i % 7}1 {9.75 + (i % 5) * 0.01:.2f} 0.{(i * 3) % 9}5")
        t += step
        i += 1
    return "\n".join(out) + "\n"


def golden():
    """getevent -t transcript in the emulator's output format."""
    log = Log(raw_max=32767)
    log.lines = [
        "add device 1: /dev/input/event3",
        '  name:     "virtio_input_multi_touch_1"',
        "add device 2: /dev/input/event1",
        '  name:     "qwerty2"',
        "could not get driver version for /dev/input/mice, Not a typewriter",
        "add device 3: /dev/input/event0",
        '  name:     "Power Button"',
        "add device 4: /dev/input/event2",
        '  name:     "goldfish_rotary"',
    ]
    global TOUCH, KEYS
    saved = TOUCH, KEYS
    TOUCH, KEYS = 3, 1
    t = 23518.204311
    log.tap(t, 0, 540, 1400, dur=0.064)
    log.tap(t + 1.73, 1, 200, 300, dur=0.071)
    log.swipe(t + 3.402, 2, (540, 1600), (560, 400), 0.412, steps=9)
    log.hold(t + 5.9, 3, 800, 900, 0.733)
    # back key with scan code, as the emulator keyboard reports it
    k = t + 7.25
    log.ev(k, 1, 4, 4, 0x9E)
    log.ev(k, 1, 1, 158, 1)
    log.ev(k, 1, 0, 0, 0)
    log.ev(k + 0.09, 1, 4, 4, 0x9E)
    log.ev(k + 0.09, 1, 1, 158, 0)
    log.ev(k + 0.09, 1, 0, 0, 0)
    p = t + 8.5
    log.ev(p, 0, 1, 116, 1)
    log.ev(p, 0, 0, 0, 0)
    log.ev(p + 0.2, 0, 1, 116, 2)
    log.ev(p + 0.2, 0, 0, 0, 0)
    log.ev(p + 0.31, 0, 1, 116, 0)
    log.ev(p + 0.31, 0, 0, 0, 0)
    # two-finger pinch
    q = t + 10.0
    log.slot = 0
    log.down(q, 0, 4, 400, 900)
    log.syn(q)
    log.down(q + 0.021, 1, 5, 700, 1000, first=False)
    log.syn(q + 0.021)
    for i in range(1, 5):
        qi = q + 0.021 + 0.05 * i
        log.move(qi, 0, 400 - 25 * i, 900 - 10 * i)
        log.move(qi, 1, 700 + 25 * i, 1000 + 10 * i)
        log.syn(qi)
    log.up(q + 0.3, 0, last=False)
    log.syn(q + 0.3)
    log.up(q + 0.33, 1)
    log.syn(q + 0.33)
    TOUCH, KEYS = saved
    d = os.path.join(ROOT, "golden")
    os.makedirs(d, exist_ok=True)
    with open(os.path.join(d, "emulator-getevent-t.txt"), "w") as f:
        f.write(log.text())


def main():
    golden()
    scen = os.path.join(ROOT, "scenarios")
    faulty = os.path.join(ROOT, "faulty")
    e = EPOCH_S
    login = lambda tag: (login_screen(), screenshot(tag, LOGIN_BOXES))
    listing = lambda tag: (list_screen(), screenshot(tag, LIST_BOXES))

    log = Log()
    log.tap(e + 0.5, 5, 540, 960)
    write(scen, "single-tap", log, [login("tap")])

    log = Log()
    log.tap(e + 0.5, 11, 540, 460)
    log.tap(e + 2.5, 12, 540, 960)
    write(scen, "two-taps", log, [login("before"), login("after")], sensors=accel(0, 3_000_000, 20_000))

    log = Log(raw_max=32767)
    log.tap(e + 0.4, 21, 540, 460)
    log.swipe(e + 1.6, 22, (540, 1500), (540, 500), 0.3)
    log.hold(e + 3.0, 23, 540, 740, 0.9)
    gps = "".join(f"gps {EPOCH_US + t} {v}\n" for t, v in [(100000, "45.5017 -73.5673 32.0"), (1100000, "45.5018 -73.5672 32.5"), (1500000, "45.5019 -73.5671"), (2200000, "45.5020 -73.5670 33.0")])
    write(scen, "three-actions", log, [login("1"), listing("2"), listing("3")], sensors=accel(0, 4_000_000, 30_000) + gps, dev=device(raw_max=32767))

    log = Log()
    log.tap(e + 0.25, 31, 540, 960, dur=0.12)
    write(scen, "tap", log, [login("tap")])

    log = Log()
    log.hold(e + 0.25, 32, 300, 1200, 0.8)
    write(scen, "long-press", log, [listing("hold")])

    log = Log()
    log.swipe(e + 0.25, 33, (100, 200), (400, 200), 0.3)
    write(scen, "swipe", log, [listing("swipe")])

    log = Log()
    t = e + 0.25
    log.down(t, 0, 41, 400, 800)
    log.syn(t)
    log.down(t + 0.03, 1, 42, 700, 1100, first=False)
    log.syn(t + 0.03)
    for i in range(1, 6):
        ti = t + 0.03 + 0.06 * i
        log.move(ti, 0, 400 - 20 * i, 800 - 20 * i)
        log.move(ti, 1, 700 + 20 * i, 1100 + 20 * i)
        log.syn(ti)
    log.up(t + 0.45, 1, last=False)
    log.syn(t + 0.45)
    log.up(t + 0.5, 0)
    log.syn(t + 0.5)
    write(scen, "multi-touch", log, [listing("pinch")])

    log = Log()
    log.key(e + 0.25, 116)
    write(scen, "key-press", log, [login("power")])

    # stray frames only, long enough to trip the idle prompt
    log = Log()
    for s in (0.5, 3.0, 6.2):
        log.syn(e + s)
    write(scen, "no-actions", log, [])

    log = Log()
    log.tap(e + 0.5, 51, 540, 460)
    log.tap(e + 2.5, 52, 540, 960)
    write(faulty, "capture-gap", log, [login("a"), login("b")], missing_screens=(1,))


if __name__ == "__main__":
    main()
