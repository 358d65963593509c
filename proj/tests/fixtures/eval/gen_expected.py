# Regenerates expected.tsv with the reference evaluator (pip install pytrec-eval-terrier).
import pytrec_eval, sys, os
here = os.path.dirname(os.path.abspath(__file__))

def read_qrels(p):
    q = {}
    for line in open(p):
        t, _, d, g = line.split()
        q.setdefault(t, {})[d] = int(g)
    return q

def read_run(p):
    r = {}
    for line in open(p):
        t, _, d, _, s, _ = line.split()
        r.setdefault(t, {})[d] = float(s)
    return r

qrels = read_qrels(os.path.join(here, "..", "qrels.txt"))
out = []
for name in ["run_a.txt", "run_b.txt", "run_c.txt"]:
    run = read_run(os.path.join(here, name))
    ev = pytrec_eval.RelevanceEvaluator(qrels, {"ndcg_cut.10", "P.5", "recall.100"})
    ev2 = pytrec_eval.RelevanceEvaluator(qrels, {"P.5"}, relevance_level=2)
    res, res2 = ev.evaluate(run), ev2.evaluate(run)
    for metric, key, src in [("ndcg@10", "ndcg_cut_10", res), ("p@5", "P_5", res), ("p_rel@5", "P_5", res2),
                             ("recall@100", "recall_100", res)]:
        vals = {t: v[key] for t, v in src.items()}
        for t in sorted(vals, key=int):
            out.append(f"{name}\t{metric}\t{t}\t{vals[t]:.6f}")
        out.append(f"{name}\t{metric}\tall\t{sum(vals.values()) / len(vals):.6f}")
open(os.path.join(here, "expected.tsv"), "w").write("\n".join(out) + "\n")
