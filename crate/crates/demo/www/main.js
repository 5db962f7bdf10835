import init, { query, subsets, independence } from "./pkg/sse_demo.js";

const $ = (id) => document.getElementById(id);

function show(target, fn) {
  try {
    target.replaceChildren(fn());
  } catch (e) {
    const p = document.createElement("p");
    p.className = "error";
    p.textContent = String(e);
    target.replaceChildren(p);
  }
}

function table(headers, rows) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const row of rows) {
    const tr = t.insertRow();
    for (const cell of row) tr.insertCell().textContent = cell;
  }
  return t;
}

function pre(value) {
  const p = document.createElement("pre");
  p.textContent = JSON.stringify(value, null, 2);
  return p;
}

await init();

$("q-run").onclick = () =>
  show($("q-out"), () => {
    const r = JSON.parse(query($("corpus").value, $("q-term").value));
    return table(
      ["mode", "|Ω|", "P", "documents"],
      [r.contains, r.phrase].map((s) => [s.mode, s.cardinality, s.probability_exact, s.doc_ids.join(", ")]),
    );
  });

$("s-run").onclick = () =>
  show($("s-out"), () => {
    const r = JSON.parse(subsets($("corpus").value, $("s-term").value, $("s-mode").value));
    const div = document.createElement("div");
    const p = document.createElement("p");
    p.textContent = `${r.subsets.length} subsets, each with probability ${r.subset_probability}; |Ω| = ${r.universe_size}`;
    div.append(p, table(["subset", "k", "hits"], r.subsets.map((s) => [s.term, s.k, s.cardinality])));
    return div;
  });

$("i-run").onclick = () =>
  show($("i-out"), () => {
    const r = JSON.parse(independence($("corpus").value, $("i-terms").value, $("i-mode").value));
    const div = document.createElement("div");
    const p = document.createElement("p");
    p.textContent = `${r.holds}/${r.pairs_tested} pairs disjoint; aggregate bias ${r.aggregate_bias}`;
    div.append(
      p,
      table(
        ["x", "y", "|x ∩ y|", "Jaccard", "disjoint"],
        r.verdicts.map((v) => [v.t_x, v.t_y, v.cards.intersect, v.jaccard.toFixed(3), v.holds ? "yes" : "no"]),
      ),
    );
    return div;
  });
