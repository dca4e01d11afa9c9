"""NLI sidecar for the `local-model` backend.

Reads one JSON request per line on stdin, {"pairs": [[premise, hypothesis], ...]},
and answers each with one line {"triples": [[...], ...], "labels": [...]},
where `labels` names the positions of every triple as the checkpoint defines them.

    python3 scripts/nli_server.py --model <checkpoint or hub id> [--device cpu|cuda]
"""

import argparse
import json
import sys

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", required=True)
    ap.add_argument("--device", default="cuda" if torch.cuda.is_available() else "cpu")
    ap.add_argument("--max-length", type=int, default=512)
    args = ap.parse_args()

    tok = AutoTokenizer.from_pretrained(args.model)
    model = AutoModelForSequenceClassification.from_pretrained(args.model).to(args.device).eval()
    id2label = model.config.id2label
    labels = [id2label[i].lower() for i in range(len(id2label))]
    if len(labels) != 3:
        sys.exit(f"expected a 3-way NLI head, got labels {labels}")

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        pairs = json.loads(line)["pairs"]
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        with torch.no_grad():
            enc = tok(premises, hypotheses, truncation="only_first", max_length=args.max_length,
                      padding=True, return_tensors="pt").to(args.device)
            probs = torch.softmax(model(**enc).logits.double(), dim=-1).cpu().tolist()
        sys.stdout.write(json.dumps({"triples": probs, "labels": labels}) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
