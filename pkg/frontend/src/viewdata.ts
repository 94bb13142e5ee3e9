// Snapshot → typed arrays for the 3D views. Pure functions, unit-testable
// without WebGL. Both views share node colors; only positions differ.

import type { Snapshot } from "./protocol";

export interface ViewData {
  count: number;
  positions: Float32Array; // xyz per node
  colors: Float32Array; // rgb per node, 0..1
  edges: Uint32Array; // node index pairs
}

export function hexToRgb(hex: string): [number, number, number] {
  const v = parseInt(hex.slice(1), 16);
  return [((v >> 16) & 0xff) / 255, ((v >> 8) & 0xff) / 255, (v & 0xff) / 255];
}

export function buildViewData(
  snapshot: Snapshot,
  which: "protein" | "maxent",
): ViewData {
  const layout =
    which === "protein" ? snapshot.protein_layout : snapshot.maxent_layout;
  const count = layout.length;
  const positions = new Float32Array(count * 3);
  const colors = new Float32Array(count * 3);
  for (let i = 0; i < count; i++) {
    positions[i * 3] = layout[i][0];
    positions[i * 3 + 1] = layout[i][1];
    positions[i * 3 + 2] = layout[i][2];
    const [r, g, b] = hexToRgb(snapshot.colors[i]);
    colors[i * 3] = r;
    colors[i * 3 + 1] = g;
    colors[i * 3 + 2] = b;
  }
  const edges = new Uint32Array(snapshot.edges.length * 2);
  for (let k = 0; k < snapshot.edges.length; k++) {
    edges[k * 2] = snapshot.edges[k][0];
    edges[k * 2 + 1] = snapshot.edges[k][1];
  }
  return { count, positions, colors, edges };
}

export function uniformColor(data: ViewData): string | null {
  if (data.count === 0) return null;
  const [r, g, b] = [data.colors[0], data.colors[1], data.colors[2]];
  for (let i = 1; i < data.count; i++) {
    if (
      data.colors[i * 3] !== r ||
      data.colors[i * 3 + 1] !== g ||
      data.colors[i * 3 + 2] !== b
    ) {
      return null;
    }
  }
  const to255 = (x: number) => Math.round(x * 255).toString(16).padStart(2, "0");
  return `#${to255(r)}${to255(g)}${to255(b)}`;
}
