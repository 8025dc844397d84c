"""Regenerate the committed test fixtures.

Trains two small CNNs (with and without biases) on synthetic coloured
silhouettes, writes them in the model.json + model.bin container, and
records reference logits / gradients computed in float64 by PyTorch.

    python3 fixtures/generate.py

Output goes next to this file. The bundle is committed; tests never run this.
"""

import json
import struct
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
from PIL import Image

HERE = Path(__file__).resolve().parent
SIZE = 32
SHAPES = ["square", "disk", "triangle", "cross", "ring"]
COLORS = [(0.90, 0.15, 0.15), (0.15, 0.25, 0.90)]
CLASS_COUNT = len(SHAPES) * len(COLORS)
MEAN = [0.5, 0.5, 0.5]
STD = [0.25, 0.25, 0.25]
FIXTURE_IMAGES = 8


def silhouette(shape, cy, cx, r):
    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    dy, dx = yy - cy, xx - cx
    if shape == "square":
        m = (np.abs(dy) <= r * 0.8) & (np.abs(dx) <= r * 0.8)
    elif shape == "disk":
        m = dy**2 + dx**2 <= r**2
    elif shape == "triangle":
        m = (dy <= r * 0.8) & (dy >= -r) & (np.abs(dx) <= (dy + r) * 0.6)
    elif shape == "cross":
        w = max(1.5, r * 0.3)
        m = ((np.abs(dy) <= w) & (np.abs(dx) <= r)) | ((np.abs(dx) <= w) & (np.abs(dy) <= r))
    elif shape == "ring":
        d2 = dy**2 + dx**2
        m = (d2 <= r**2) & (d2 >= (r * 0.55) ** 2)
    else:
        raise ValueError(shape)
    return m


def sample(rng, label):
    shape = SHAPES[label // 2]
    color = np.array(COLORS[label % 2])
    r = rng.uniform(6.0, 10.0)
    cy = rng.uniform(r, SIZE - 1 - r)
    cx = rng.uniform(r, SIZE - 1 - r)
    mask = silhouette(shape, cy, cx, r)
    bg = rng.uniform(0.35, 0.65)
    img = np.full((3, SIZE, SIZE), bg)
    jitter = rng.uniform(-0.05, 0.05, size=3)
    for c in range(3):
        img[c][mask] = np.clip(color[c] + jitter[c], 0.0, 1.0)
    img += rng.normal(0.0, 0.03, size=img.shape)
    img = np.clip(img, 0.0, 1.0)
    # quantize exactly as the PNG round-trip will
    img = np.round(img * 255.0) / 255.0
    return img, mask


class Net(nn.Module):
    def __init__(self, bias):
        super().__init__()
        self.conv1 = nn.Conv2d(3, 8, 3, padding=1, bias=bias)
        self.conv2 = nn.Conv2d(8, 16, 3, padding=1, bias=bias)
        self.conv3 = nn.Conv2d(16, 16, 3, padding=1, bias=bias)
        self.fc1 = nn.Linear(256, 32, bias=bias)
        self.fc2 = nn.Linear(32, CLASS_COUNT, bias=bias)
        self.pool = nn.MaxPool2d(2, 2)
        self.register_buffer("mean", torch.tensor(MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(STD).view(1, 3, 1, 1))

    def features(self, x):
        x = (x - self.mean) / self.std
        x = self.pool(torch.relu(self.conv1(x)))
        x = self.pool(torch.relu(self.conv2(x)))
        return self.conv3(x)

    def head(self, conv3_out):
        x = self.pool(torch.relu(conv3_out))
        x = torch.flatten(x, 1)
        return self.fc2(torch.relu(self.fc1(x)))

    def forward(self, x):
        return self.head(self.features(x))


def manifest_layers(bias):
    layers = []
    offset = 0

    def param(n):
        nonlocal offset
        o = offset
        offset += n
        return o

    def conv(name, cin, cout):
        w = param(cout * cin * 9)
        b = param(cout)
        return {
            "kind": "conv2d", "name": name, "out_channels": cout, "in_channels": cin,
            "kernel": [3, 3], "stride": [1, 1], "padding": [1, 1],
            "weights_offset": w, "bias_offset": b,
        }

    def dense(name, fin, fout):
        w = param(fout * fin)
        b = param(fout)
        return {
            "kind": "dense", "name": name, "in_features": fin, "out_features": fout,
            "weights_offset": w, "bias_offset": b,
        }

    pool = lambda name: {"kind": "maxpool2d", "name": name, "kernel": [2, 2], "stride": [2, 2]}
    relu = lambda name: {"kind": "relu", "name": name}
    layers += [conv("conv1", 3, 8), relu("relu1"), pool("pool1")]
    layers += [conv("conv2", 8, 16), relu("relu2"), pool("pool2")]
    layers += [conv("conv3", 16, 16), relu("relu3"), pool("pool3")]
    layers += [{"kind": "flatten", "name": "flatten"}]
    layers += [dense("fc1", 256, 32), relu("relu4"), dense("fc2", 32, CLASS_COUNT)]
    return layers


def export(net, out_dir, bias):
    out_dir.mkdir(parents=True, exist_ok=True)
    blob = []
    for mod in [net.conv1, net.conv2, net.conv3, net.fc1, net.fc2]:
        blob.append(mod.weight.detach().double().numpy().reshape(-1))
        if mod.bias is not None:
            blob.append(mod.bias.detach().double().numpy().reshape(-1))
        else:
            blob.append(np.zeros(mod.weight.shape[0]))
    flat = np.concatenate(blob).astype("<f4")
    (out_dir / "model.bin").write_bytes(flat.tobytes())
    manifest = {
        "format_version": 1,
        "input": {"channels": 3, "height": SIZE, "width": SIZE, "mean": MEAN, "std": STD},
        "class_count": CLASS_COUNT,
        "layers": manifest_layers(bias),
    }
    (out_dir / "model.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return flat


def reload_f64(flat, bias):
    net = Net(bias=True).double()
    pos = 0
    for mod in [net.conv1, net.conv2, net.conv3, net.fc1, net.fc2]:
        n = mod.weight.numel()
        mod.weight.data = torch.from_numpy(flat[pos:pos + n].astype(np.float64)).view_as(mod.weight)
        pos += n
        m = mod.bias.numel()
        mod.bias.data = torch.from_numpy(flat[pos:pos + m].astype(np.float64))
        pos += m
    assert pos == flat.size
    return net


def train(bias, seed):
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    net = Net(bias)
    n = 4000
    labels = rng.integers(0, CLASS_COUNT, size=n)
    xs = np.stack([sample(rng, int(l))[0] for l in labels]).astype(np.float32)
    x = torch.from_numpy(xs)
    y = torch.from_numpy(labels)
    opt = torch.optim.Adam(net.parameters(), lr=3e-3)
    for epoch in range(8):
        perm = torch.randperm(n)
        total = 0.0
        for i in range(0, n, 64):
            idx = perm[i:i + 64]
            loss = nn.functional.cross_entropy(net(x[idx]), y[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        with torch.no_grad():
            acc = (net(x).argmax(1) == y).float().mean().item()
        print(f"bias={bias} epoch {epoch} loss {total / n:.4f} acc {acc:.3f}")
    return net


def references(net64, images):
    out = []
    for name, img in images:
        x = torch.from_numpy(img[None]).double()
        feats = net64.features(x)
        feats.retain_grad()
        logits = net64.head(feats)
        top = int(logits.argmax())
        logits[0, top].backward()
        g = feats.grad[0].numpy()
        flat = np.abs(g).reshape(-1)
        order = np.argsort(-flat, kind="stable")[:10]
        spots = []
        for f in order:
            c, rem = divmod(int(f), g.shape[1] * g.shape[2])
            yy, xx = divmod(rem, g.shape[2])
            spots.append({"index": [c, yy, xx], "value": float(g[c, yy, xx])})
        out.append({
            "image": name,
            "logits": [round(float(v), 6) for v in logits[0].detach().numpy()],
            "argmax": top,
            "gradient": {
                "layer": "conv3",
                "class_index": top,
                "checksum": float(g.sum()),
                "spots": spots,
            },
        })
    return out


def main():
    rng = np.random.default_rng(2024)
    images = []
    (HERE / "images").mkdir(exist_ok=True)
    (HERE / "masks").mkdir(exist_ok=True)
    for i in range(FIXTURE_IMAGES):
        label = (i * 3) % CLASS_COUNT
        img, mask = sample(rng, label)
        name = f"img{i:02d}.png"
        px = np.round(img.transpose(1, 2, 0) * 255.0).astype(np.uint8)
        Image.fromarray(px, "RGB").save(HERE / "images" / name)
        Image.fromarray((mask * 255).astype(np.uint8), "L").save(HERE / "masks" / name)
        back = np.asarray(Image.open(HERE / "images" / name)).transpose(2, 0, 1) / 255.0
        assert np.array_equal(back, img)
        images.append((name, img))

    for bias, sub, seed in [(True, "model", 7), (False, "bias_free", 11)]:
        net = train(bias, seed)
        out_dir = HERE / sub
        flat = export(net, out_dir, bias)
        net64 = reload_f64(flat, bias)
        refs = references(net64, images)
        # self-check: float32 torch on the exported weights agrees
        net32 = reload_f64(flat, bias).float()
        for (name, img), ref in zip(images, refs):
            l32 = net32(torch.from_numpy(img[None]).float())[0].detach().numpy()
            assert np.max(np.abs(l32 - np.array(ref["logits"]))) < 1e-4, name
        (out_dir / "reference.json").write_text(json.dumps({"images": refs}, indent=2) + "\n")
        print(sub, [r["argmax"] for r in refs])


if __name__ == "__main__":
    main()
