// Hash router: #/ is the dashboard, #/reports/<code> the explorer.

import { renderDashboard } from "./dashboard.js";
import { renderExplorer } from "./explorer.js";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}

let dispose: (() => void) | null = null;

function route(): void {
  dispose?.();
  const match = /^#\/reports\/(\d+)$/.exec(window.location.hash);
  if (match) {
    dispose = renderExplorer(root as HTMLElement, Number(match[1]));
  } else {
    dispose = renderDashboard(root as HTMLElement);
  }
}

window.addEventListener("hashchange", route);
route();
