// DOM rendering: one render(state) pass over a static skeleton.

import { ConsoleState, isDone } from "./console.js";

export function mount(root: HTMLElement): void {
  root.innerHTML = `
    <div id="banner" class="banner hidden">connection lost — retrying…</div>
    <header>
      <h1>labeling console</h1>
      <div id="progress" class="progress"></div>
    </header>
    <main>
      <section id="card" class="card">
        <div id="item-view" class="item-view"></div>
        <div class="actions">
          <button id="btn-pos" title="shortcut: p">positive (p)</button>
          <button id="btn-neg" title="shortcut: n">negative (n)</button>
        </div>
      </section>
      <section id="done" class="done hidden">
        <h2>budget exhausted</h2>
        <p id="done-summary"></p>
      </section>
      <section class="stats">
        <div id="counts"></div>
        <svg id="spark" viewBox="0 0 200 40" preserveAspectRatio="none"></svg>
      </section>
    </main>
  `;
}

function sparkline(svg: SVGElement, history: number[]): void {
  if (history.length < 2) {
    svg.innerHTML = "";
    return;
  }
  const w = 200;
  const h = 40;
  const step = w / (history.length - 1);
  const points = history
    .map((auc, i) => `${(i * step).toFixed(1)},${(h - auc * (h - 4) - 2).toFixed(1)}`)
    .join(" ");
  svg.innerHTML = `<polyline fill="none" stroke="#2a7" stroke-width="1.5" points="${points}"/>`;
}

export function render(root: HTMLElement, state: ConsoleState): void {
  const el = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;

  el("banner").classList.toggle("hidden", state.connected);

  const status = state.status;
  el("progress").textContent = status
    ? `iteration ${status.iteration} / ${status.budget}`
    : "connecting…";
  el("counts").textContent = status
    ? `${status.n_pos} positive · ${status.n_neg} negative · ` +
      (status.auc_history.length
        ? `AUC ${status.auc_history[status.auc_history.length - 1].toFixed(3)}`
        : "AUC –")
    : "";
  sparkline(el("spark") as unknown as SVGElement, status ? status.auc_history : []);

  const done = isDone(state);
  el("done").classList.toggle("hidden", !done);
  el("card").classList.toggle("hidden", done);
  if (done && status) {
    el("done-summary").textContent =
      `${status.budget} labels collected (${status.n_pos} positive, ${status.n_neg} negative).`;
    return;
  }

  const view = el("item-view");
  const pos = root.querySelector<HTMLButtonElement>("#btn-pos")!;
  const neg = root.querySelector<HTMLButtonElement>("#btn-neg")!;
  if (state.pending === null) {
    view.innerHTML = `<p class="waiting">waiting for the next selection…</p>`;
    pos.disabled = true;
    neg.disabled = true;
    return;
  }
  pos.disabled = state.submitting;
  neg.disabled = state.submitting;
  const { item_id, url } = state.pending;
  if (url) {
    view.innerHTML =
      `<img src="${url}" alt="${item_id}"/><p class="item-id">${item_id}</p>`;
  } else {
    view.innerHTML =
      `<div class="no-image">no preview</div><p class="item-id">${item_id}</p>`;
  }
}
