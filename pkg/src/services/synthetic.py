"""Deterministic synthetic Devign-style corpus for tests and demos."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PROJECT_NAMES = {
    'FFmpeg': ['avctx', 'pkt', 'frame', 'buf', 'gb', 'sample_rate', 'codec'],
    'QEMU': ['opaque', 'env', 'dev', 'addr', 'val', 'bus', 'irq'],
}

SAFE_BODIES = [
    "    if ({a} < 0 || {b} > {n})\n        return -1;\n    memcpy({a}_dst, {b}, {n});\n    return 0;",
    "    int i;\n    for (i = 0; i < {n}; i++) {{\n        {a}[i] = {b}[i];\n    }}\n    return 0;",
    "    if (!{a})\n        return -EINVAL;\n    {b} = av_clip({b}, 0, {n});\n    return {b};",
    "    /* checked */\n    if ({a} >= sizeof({b}))\n        return -1;\n    return {b}[{a}];",
]

VULNERABLE_BODIES = [
    "    char tmp[{n}];\n    strcpy(tmp, {a});\n    if ({b}) {{\n        while ({b}--) {{\n            tmp[{b}] = {a}[{b}];\n        }}\n    }}\n    return 0;",
    "    memcpy({a}, {b}, len);\n    if ({a} && {b}) {{\n        if (len > 0) {{\n            {a}[len] = 0;\n        }}\n    }}\n    return len;",
    "    // TODO: bounds\n    int idx = {b};\n    {a}[idx] = {b} ? {b} : {n};\n    return {a}[idx + {n}];",
    "    {a} = malloc({b} * {n});\n    for (;;) {{\n        if ({b}) {{\n            switch ({b}) {{\n            case 1: free({a});\n            case 2: return {a}[0];\n            }}\n        }}\n    }}",
]


def _function(rng: np.random.Generator, project: str, index: int, vulnerable: bool) -> str:
    names = PROJECT_NAMES.get(project, PROJECT_NAMES['FFmpeg'])
    a, b = (names[i] for i in rng.choice(len(names), size=2, replace=False))
    bodies = VULNERABLE_BODIES if vulnerable else SAFE_BODIES
    body = bodies[int(rng.integers(len(bodies)))].format(a=a, b=b, n=int(rng.integers(4, 64)))
    params = ', '.join(f"int {names[i]}" for i in rng.choice(len(names), size=int(rng.integers(0, 4)), replace=False))
    return f"static int {project.lower()}_fn_{index}({params or 'void'})\n{{\n{body}\n}}\n"


def generate_corpus(
    n: int = 200,
    seed: int = 7,
    projects: Sequence[str] = ('FFmpeg', 'QEMU'),
    positive_rate: float = 0.45
) -> List[Dict]:
    """
    Devign-format entries (project, commit_id, target, func).

    Projects alternate; the first two functions of every project are one
    safe and one vulnerable so both classes are always present.
    """
    rng = np.random.default_rng(seed)
    entries = []
    seen: Dict[str, int] = {}

    for i in range(n):
        project = projects[i % len(projects)]
        count = seen.get(project, 0)
        seen[project] = count + 1

        if count < 2:
            vulnerable = count == 1
        else:
            vulnerable = bool(rng.random() < positive_rate)

        # A tenth of the labels are flipped to mimic benchmark noise
        source = _function(rng, project, i, vulnerable if rng.random() >= 0.1 else not vulnerable)
        entries.append({
            'project': project,
            'commit_id': f"{int(rng.integers(0, 2 ** 32)):08x}",
            'target': int(vulnerable),
            'func': source,
        })
    return entries


def write_corpus(entries: List[Dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        if path.suffix.lower() == '.jsonl':
            for entry in entries:
                f.write(json.dumps(entry) + '\n')
        else:
            json.dump(entries, f, indent=1)
    logger.info(f"Wrote {len(entries)} synthetic functions to {path}")
    return path
