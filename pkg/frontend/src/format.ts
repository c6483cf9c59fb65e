/** Rendering helpers. Every formatter here is a declared derivation that the
 * thin-client audit (audit.ts) knows how to reverse, so keep them in sync. */

export function formatWatts(value: number): string {
  return `${value.toFixed(0)} W`;
}

export function formatKilowatts(value: number): string {
  return `${(value / 1000).toFixed(1)} kW`;
}

export function formatPercent(fraction: number): string {
  return `${(fraction * 100).toFixed(1)}%`;
}

export function formatFactor(value: number): string {
  return value.toFixed(4);
}

export function formatDelta(value: number): string {
  const sign = value >= 0 ? "+" : "";
  return `${sign}${value.toFixed(4)}`;
}

export function formatCount(value: number): string {
  return String(value);
}
