"""Batch front-end: augment -> trace -> extract -> evaluate -> explain -> attack.

Every subcommand is deterministic given its flags and seed, and every
report embeds the full flag set plus a fingerprint of it so numbers stay
traceable to exact settings. Exit codes: 0 success, 2 usage, 3 invalid
input or parameters, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import augment as aug
from . import corpus as corpus_mod
from . import explain as expl
from . import oracle as oracle_mod
from . import transitions as trans
from . import wfa as wfa_mod
from .corpus import TraceParseError, load_embeddings, load_traces, zipf_median_estimate
from .envelope import ArtifactError


def _fingerprint(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def _config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["fingerprint"] = _fingerprint(cfg)
    return cfg


def _default_threads() -> int:
    return int(os.environ.get("WFAKIT_THREADS", "1"))


def _parse_grid(text: str, cast=float) -> list:
    return [cast(x) for x in text.split(",") if x != ""]


def _alpha_for(args, label_count: int) -> float:
    if args.alpha is not None:
        return args.alpha
    return 0.4 if label_count > 2 else 0.2


def _beta_for(args, counts) -> float:
    if args.beta == "auto":
        return trans.suggest_beta(counts)
    return float(args.beta)


def _extract_with_timer(train, args):
    start = time.perf_counter()
    states = wfa_mod.cluster_outputs(train, args.k, args.seed)
    counts = trans.count_transitions(train, states)
    beta = _beta_for(args, counts)
    alpha = _alpha_for(args, train.label_count)
    matrices = trans.build_transition_matrices(counts, states, args.filling, beta)
    if alpha > 0.0:
        matrices = trans.enhance_context(matrices, alpha)
    cfg = {
        "k": args.k, "seed": args.seed, "filling": args.filling,
        "beta": beta, "alpha": alpha, "label_count": train.label_count,
        "word_totals": counts.word_totals().tolist(),
    }
    automaton = wfa_mod.Wfa(states=states, alphabet=train.alphabet,
                            matrices=matrices, config=cfg)
    return automaton, start


def _write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, default=str)
        fh.write("\n")


def cmd_extract(args) -> int:
    train = load_traces(args.train, "train")
    automaton, start = _extract_with_timer(train, args)
    test = load_traces(args.test, "test")
    ev = wfa_mod.evaluate(automaton, test, threads=args.threads)
    seconds = time.perf_counter() - start
    ev.seconds = seconds
    automaton.config["run"] = _config(args)
    wfa_mod.save(automaton, args.out)
    print(ev.table(args.filling))
    if args.report:
        doc = ev.to_dict()
        doc["run"] = _config(args)
        _write_report(doc, args.report)
    return 0


def cmd_eval(args) -> int:
    automaton = wfa_mod.load(args.wfa)
    test = load_traces(args.test, "test")
    ev = wfa_mod.evaluate(automaton, test, threads=args.threads)
    print(ev.table(automaton.matrices.filling))
    if args.report:
        doc = ev.to_dict()
        doc["run"] = _config(args)
        _write_report(doc, args.report)
    return 0


def cmd_sweep(args) -> int:
    train = load_traces(args.train, "train")
    test = load_traces(args.test, "test")
    ks = _parse_grid(args.ks, int)
    alphas = _parse_grid(args.alphas)
    betas = _parse_grid(args.betas)
    if not ks or not alphas or not betas:
        raise ValueError("sweep grid is empty")
    fingerprint = _fingerprint(_config(args))
    lines = ["k\talpha\tbeta\tfilling\tcr\tjsd\tseconds\tconfig"]
    for k in ks:
        states = wfa_mod.cluster_outputs(train, k, args.seed)
        counts = trans.count_transitions(train, states)
        for beta in betas:
            base = trans.build_transition_matrices(counts, states, args.filling, beta)
            for alpha in alphas:
                start = time.perf_counter()
                matrices = trans.enhance_context(base, alpha) if alpha > 0 else base
                automaton = wfa_mod.Wfa(
                    states=states, alphabet=train.alphabet, matrices=matrices,
                    config={"k": k, "alpha": alpha, "beta": beta,
                            "filling": args.filling, "seed": args.seed},
                )
                ev = wfa_mod.evaluate(automaton, test, threads=args.threads)
                seconds = time.perf_counter() - start
                lines.append(
                    f"{k}\t{alpha}\t{beta}\t{args.filling}\t"
                    f"{ev.cr:.6f}\t{ev.jsd:.6f}\t{seconds:.3f}\t{fingerprint}"
                )
    out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_augment(args) -> int:
    sentences, alphabet = aug.load_sentences(args.sentences)
    alphabet = corpus_mod.ensure_unk(alphabet)
    emb = load_embeddings(args.embeddings)
    syn = aug.build_synonyms(emb, alphabet, args.k)
    cfg = aug.AugmentConfig(k=args.k, p_r=args.p_r, p_d=args.p_d,
                            epochs=args.epochs, seed=args.seed)
    out = aug.augment_corpus(sentences, syn, cfg)
    aug.save_sentences(out, alphabet, args.out)
    print(f"wrote {len(out)} sentences ({len(sentences)} originals, "
          f"{len(out) - len(sentences)} augmented) to {args.out}")
    return 0


def cmd_explain(args) -> int:
    automaton = wfa_mod.load(args.wfa)
    space = expl.tme(automaton.matrices)
    scores = expl.influence_score(space, automaton.states)
    classes = (_parse_grid(args.classes, int) if args.classes
               else list(range(automaton.label_count)))
    doc = {"run": _config(args), "top_words": {}}
    for c in classes:
        top = expl.top_influential(scores, c, args.count)
        doc["top_words"][str(c)] = top
        shown = "(suppressed)" if args.suppress_words else ", ".join(top)
        print(f"class {c}: {shown}")
    if args.report:
        if args.suppress_words:
            doc["top_words"] = {k: ["(suppressed)"] * len(v)
                                for k, v in doc["top_words"].items()}
        _write_report(doc, args.report)
    return 0


def cmd_pairs(args) -> int:
    automaton = wfa_mod.load(args.wfa)
    emb = load_embeddings(args.embeddings)
    space = expl.tme(automaton.matrices)
    criteria = expl.PairCriteria(epsilon=args.epsilon, delta=args.delta, mode=args.mode)
    words = None
    if not args.full_scan:
        # restrict the quadratic scan to the most frequently observed words
        stored = automaton.config.get("word_totals")
        if stored is not None and len(stored) == len(automaton.alphabet):
            totals = np.asarray(stored, dtype=np.int64)
        else:
            totals = np.zeros(len(automaton.alphabet), dtype=np.int64)
            for wid, mat in automaton.matrices.missing_rows.items():
                totals[wid] = automaton.matrices.n - int(mat.sum())
        order = np.argsort(-totals, kind="stable")[: args.limit]
        words = [automaton.alphabet.words[i] for i in order]
    hits = expl.mine_pairs(space, emb, criteria, words)
    lines = ["word_a\tword_b\td_t\td_s"]
    for h in hits:
        if args.suppress_words:
            lines.append(f"(pair)\t(pair)\t{h.d_t:.6f}\t{h.d_s:.6f}")
        else:
            lines.append(f"{h.word_a}\t{h.word_b}\t{h.d_t:.6f}\t{h.d_s:.6f}")
    out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    print(f"{len(hits)} {args.mode} pairs")
    return 0


def _remap_sentences(test, alphabet):
    """Map corpus sentences into the automaton's alphabet; drop unmappable ones.

    Returns the mapped sentences, the indices of the traces they came from,
    and the number dropped.
    """
    sentences, kept, skipped = [], [], 0
    for idx, tr in enumerate(test.traces):
        ids = []
        for tok in tr.sentence.tokens:
            wid = alphabet.id_of(test.alphabet.words[tok])
            if wid is None:
                wid = alphabet.unk_id
            if wid is None:
                ids = None
                break
            ids.append(wid)
        if ids is None:
            skipped += 1
            continue
        sentences.append(corpus_mod.Sentence(ids, tr.sentence.label))
        kept.append(idx)
    return sentences, kept, skipped


def cmd_attack(args) -> int:
    automaton = wfa_mod.load(args.wfa)
    emb = load_embeddings(args.embeddings)
    test = load_traces(args.test, "test")
    space = expl.tme(automaton.matrices)
    scores = expl.influence_score(space, automaton.states)
    sentences, kept, skipped = _remap_sentences(test, automaton.alphabet)
    if skipped:
        print(f"skipped {skipped} sentences with unmappable tokens", file=sys.stderr)
    if not sentences:
        raise ValueError("no attackable sentences after alphabet mapping")

    def make_cfg(method: str, k: int, eps: float) -> expl.AttackConfig:
        return expl.AttackConfig(top_k=k, d_t_min=args.d_t_min, d_s_max=eps,
                                 method=method, seed=args.seed)

    if args.candidates and args.labels:
        # second pass: score candidates labelled externally
        with open(args.candidates, encoding="utf-8") as fh:
            cand = [json.loads(line) for line in fh if line.strip()]
        with open(args.labels, encoding="utf-8") as fh:
            labels = [int(line.strip()) for line in fh if line.strip()]
        if len(cand) != len(labels) or len(cand) != len(sentences):
            raise ValueError("candidates, labels, and test set sizes disagree")
        orig = [int(np.argmax(test.traces[i].outputs[-1])) for i in kept]
        flips = sum(
            1 for c, lab, o in zip(cand, labels, orig)
            if c.get("modified") and lab != o
        )
        asr = flips / len(cand)
        print(f"ASR\t{asr:.4f}")
        if args.report:
            _write_report({"asr": asr, "attempted": len(cand), "run": _config(args)},
                          args.report)
        return 0

    if args.emit_candidates:
        # first pass: write modified sentences for external labelling
        cfg = make_cfg(args.method, args.top_k, args.d_s_max)
        with open(args.emit_candidates, "w", encoding="utf-8") as fh:
            for s in sentences:
                res = expl.attack_sentence(s, scores, space, emb, lambda _s: 0, cfg)
                rec = {
                    "tokens": [automaton.alphabet.words[t] for t in res.sentence.tokens],
                    "modified": bool(res.substitutions),
                }
                fh.write(json.dumps(rec) + "\n")
        print(f"wrote {len(sentences)} candidates to {args.emit_candidates}")
        return 0

    if not args.oracle:
        raise ValueError("attack needs --oracle, --emit-candidates, or "
                         "--candidates with --labels")
    model = oracle_mod.load_model(args.oracle)
    query = oracle_mod.OracleQuery(model, automaton.alphabet)

    if args.grid:
        rows = [("embedding", None), ("weak", args.weak_eps), ("strong", args.strong_eps)]
        print(f"{'setting':<12} {'k=1':>8} {'k=2':>8}")
        doc = {"run": _config(args), "grid": {}}
        for name, eps in rows:
            cells = []
            for k in (1, 2):
                method = "embedding" if name == "embedding" else "tme"
                cfg = make_cfg(method, k, eps if eps is not None else args.d_s_max)
                rep = expl.attack_corpus(sentences, scores, space, emb, query, cfg,
                                         threads=args.threads)
                cells.append(rep.asr)
            doc["grid"][name] = {"k1": cells[0], "k2": cells[1]}
            print(f"{name:<12} {cells[0]:>8.4f} {cells[1]:>8.4f}")
        if args.report:
            _write_report(doc, args.report)
        return 0

    cfg = make_cfg(args.method, args.top_k, args.d_s_max)
    rep = expl.attack_corpus(sentences, scores, space, emb, query, cfg,
                             threads=args.threads)
    print(f"ASR\t{rep.asr:.4f}")
    if args.report:
        doc = {"asr": rep.asr, "attempted": len(rep.results), "run": _config(args)}
        doc["sentences"] = [
            {
                "tokens": [automaton.alphabet.words[t] for t in r.sentence.tokens],
                "original_label": r.original_label,
                "attacked_label": r.attacked_label,
                "success": r.success,
                "substitutions": [
                    [p, automaton.alphabet.words[a], automaton.alphabet.words[b]]
                    for p, a, b in r.substitutions
                ],
            }
            for r in rep.results
        ]
        _write_report(doc, args.report)
    return 0


def cmd_oracle_gen(args) -> int:
    model = oracle_mod.SyntheticModel.random(
        states=args.states, words=args.words, labels=args.labels, seed=args.seed,
        zipf_exponent=args.zipf_exponent,
        emission_sharpness=args.emission_sharpness,
        attractor_frac=args.attractor_frac, identity_frac=args.identity_frac,
        stochasticity=args.stochasticity,
    )
    train_lo, train_hi = _parse_grid(args.train_lengths, int)
    test_lo, test_hi = _parse_grid(args.test_lengths, int)
    train, _ = oracle_mod.sample_corpus(
        model, args.train_sentences, (train_lo, train_hi), args.seed + 1, "train")
    test, _ = oracle_mod.sample_corpus(
        model, args.test_sentences, (test_lo, test_hi), args.seed + 2, "test")
    corpus_mod.save_traces(train, args.out_train)
    corpus_mod.save_traces(test, args.out_test)
    if args.model_out:
        oracle_mod.save_model(model, args.model_out)
    print(f"wrote {len(train)} train and {len(test)} test traces")
    return 0


def cmd_export_tme(args) -> int:
    automaton = wfa_mod.load(args.wfa)
    space = expl.tme(automaton.matrices)
    expl.export_tme(space, args.out)
    print(f"wrote {len(space.alphabet)} vectors of dimension {space.n ** 2}")
    return 0


def cmd_suggest_params(args) -> int:
    train = load_traces(args.train, "train")
    m = len(train.alphabet)
    n_tokens = train.token_total()
    median = zipf_median_estimate(m, n_tokens)
    states = wfa_mod.cluster_outputs(train, args.k, args.seed)
    counts = trans.count_transitions(train, states)
    beta = trans.suggest_beta(counts)
    alpha = 0.4 if train.label_count > 2 else 0.2
    print(f"alphabet size        {m}")
    print(f"total tokens         {n_tokens}")
    print(f"zipf median estimate {median:.2f}")
    if median <= args.k + 1:
        print("  -> expect widespread missing rows at this state count; "
              "prefer empirical filling")
    print(f"suggested beta       {beta:.4f}")
    print(f"suggested alpha      {alpha}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wfakit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=_default_threads())

    sp = sub.add_parser("extract", help="build an automaton from traces and evaluate it")
    sp.add_argument("--train", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=None,
                    help="static probability; default 0.4 multi-class, 0.2 binary")
    sp.add_argument("--beta", default="0.3",
                    help="reference rate in [0,1], or 'auto' for the "
                         "self-transition proportion")
    sp.add_argument("--filling", choices=trans.FILLINGS, default="empirical")
    sp.add_argument("--out", required=True)
    sp.add_argument("--report")
    common(sp)
    sp.set_defaults(func=cmd_extract)

    sp = sub.add_parser("eval", help="evaluate a stored automaton against traces")
    sp.add_argument("--wfa", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--report")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("sweep", help="grid over k/alpha/beta, emit a TSV table")
    sp.add_argument("--train", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--ks", default="10,20,30,40,50")
    sp.add_argument("--alphas", default="0,0.2,0.4,0.6,0.8,1.0")
    sp.add_argument("--betas", default="0.1,0.3,0.5,0.7,0.9")
    sp.add_argument("--filling", choices=trans.FILLINGS, default="empirical")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("augment", help="synonym-replacement and dropout variants")
    sp.add_argument("--sentences", required=True)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--p-r", dest="p_r", type=float, default=0.4)
    sp.add_argument("--p-d", dest="p_d", type=float, default=0.2)
    sp.add_argument("--epochs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("explain", help="top influential words per class")
    sp.add_argument("--wfa", required=True)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--classes", default=None, help="comma list; default all")
    sp.add_argument("--suppress-words", action="store_true",
                    help="print scores only, for sensitive vocabularies")
    sp.add_argument("--report")
    common(sp)
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("pairs", help="mine collaborative or adversarial word pairs")
    sp.add_argument("--wfa", required=True)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--mode", choices=("collaborative", "adversarial"),
                    default="adversarial")
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--limit", type=int, default=2000,
                    help="scan only the most frequent words")
    sp.add_argument("--full-scan", action="store_true")
    sp.add_argument("--suppress-words", action="store_true")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_pairs)

    sp = sub.add_parser("attack", help="substitution attack with ASR evaluation")
    sp.add_argument("--wfa", required=True)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--top-k", dest="top_k", type=int, default=1)
    sp.add_argument("--d-t-min", dest="d_t_min", type=float, default=0.01)
    sp.add_argument("--d-s-max", dest="d_s_max", type=float, default=0.15)
    sp.add_argument("--method", choices=("tme", "embedding"), default="tme")
    sp.add_argument("--oracle", help="oracle model file answering label queries")
    sp.add_argument("--emit-candidates",
                    help="write modified sentences for external labelling and stop")
    sp.add_argument("--candidates", help="candidate file from --emit-candidates")
    sp.add_argument("--labels", help="labels for --candidates, one per line")
    sp.add_argument("--grid", action="store_true",
                    help="with --oracle: embedding/weak/strong x k=1,2 table")
    sp.add_argument("--weak-eps", dest="weak_eps", type=float, default=0.15)
    sp.add_argument("--strong-eps", dest="strong_eps", type=float, default=0.18)
    sp.add_argument("--report")
    common(sp)
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("oracle-gen", help="sample trace corpora from a synthetic model")
    sp.add_argument("--states", type=int, default=8)
    sp.add_argument("--words", type=int, default=200)
    sp.add_argument("--labels", type=int, default=8)
    sp.add_argument("--train-sentences", dest="train_sentences", type=int, default=5000)
    sp.add_argument("--test-sentences", dest="test_sentences", type=int, default=1000)
    sp.add_argument("--train-lengths", dest="train_lengths", default="2,6")
    sp.add_argument("--test-lengths", dest="test_lengths", default="8,16")
    sp.add_argument("--zipf-exponent", dest="zipf_exponent", type=float, default=1.0)
    sp.add_argument("--emission-sharpness", dest="emission_sharpness",
                    type=float, default=0.8)
    sp.add_argument("--attractor-frac", dest="attractor_frac", type=float, default=0.7)
    sp.add_argument("--identity-frac", dest="identity_frac", type=float, default=0.15)
    sp.add_argument("--stochasticity", type=float, default=0.0)
    sp.add_argument("--out-train", dest="out_train", required=True)
    sp.add_argument("--out-test", dest="out_test", required=True)
    sp.add_argument("--model-out", dest="model_out")
    common(sp)
    sp.set_defaults(func=cmd_oracle_gen)

    sp = sub.add_parser("export-tme", help="write transition-matrix embeddings as text")
    sp.add_argument("--wfa", required=True)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_export_tme)

    sp = sub.add_parser("suggest-params", help="sparsity diagnostics and defaults")
    sp.add_argument("--train", required=True)
    sp.add_argument("--k", type=int, default=10)
    common(sp)
    sp.set_defaults(func=cmd_suggest_params)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TraceParseError, ArtifactError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
