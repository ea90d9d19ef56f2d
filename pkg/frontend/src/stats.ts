/** Solver statistics panel: iterations, solve time, reaction force. */

import { Stats } from "./scene.js";

export function formatStats(stats: Stats | null): string {
  if (stats === null) return "no solves yet";
  const [rx, ry, rz] = stats.reaction;
  const mag = Math.hypot(rx, ry, rz);
  const status = stats.converged ? "converged" : "NOT CONVERGED";
  return (
    `${status} | ${stats.iters} iteration${stats.iters === 1 ? "" : "s"} | ` +
    `${stats.ms.toFixed(1)} ms | reaction ${mag.toFixed(3)} N ` +
    `(${rx.toFixed(3)}, ${ry.toFixed(3)}, ${rz.toFixed(3)})`
  );
}

export class StatsPanel {
  constructor(private el: HTMLElement) {}

  update(stats: Stats | null): void {
    this.el.textContent = formatStats(stats);
    this.el.classList.toggle("warn", stats !== null && !stats.converged);
  }
}
