// Bootstrap: wire the console to the DOM. The service origin defaults to
// same-origin and can be overridden with ?api=http://host:port for local
// development where the console is served separately.

import { LabelingApi } from "./api.js";
import { LabelingConsole } from "./console.js";
import { mount, render } from "./render.js";

export interface AppOptions {
  base?: string;
  pollIntervalMs?: number;
}

export function startApp(root: HTMLElement, options: AppOptions = {}): LabelingConsole {
  const base =
    options.base ??
    new URLSearchParams(window.location.search).get("api") ??
    "";
  mount(root);
  const console_ = new LabelingConsole(
    new LabelingApi(base),
    (state) => render(root, state),
    options.pollIntervalMs ?? 1000,
  );

  root.querySelector<HTMLButtonElement>("#btn-pos")!.addEventListener("click", () => {
    void console_.submit(1);
  });
  root.querySelector<HTMLButtonElement>("#btn-neg")!.addEventListener("click", () => {
    void console_.submit(0);
  });
  document.addEventListener("keydown", (event) => {
    if (event.key === "p") void console_.submit(1);
    if (event.key === "n") void console_.submit(0);
  });

  console_.start();
  return console_;
}

declare global {
  interface Window {
    __seafarerConsole?: LabelingConsole;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.__seafarerConsole = startApp(document.getElementById("app")!);
}
