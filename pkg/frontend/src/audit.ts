/** Thin-client audit.
 *
 * The console promises that every number it renders traces back to recorded
 * API traffic. This module makes that checkable: collectSources() walks a
 * TrafficLog and enumerates every value a renderer is allowed to show —
 * verbatim strings, raw numbers, and the declared formatter derivations from
 * format.ts (fixed-point roundings, percent of a fraction, kilowatt scaling,
 * collection sizes). auditDom() then walks rendered DOM text and reports any
 * digit-bearing token with no source.
 */
import type { TrafficLog } from "./api.js";

export interface Sources {
  strings: Set<string>;
  numbers: Set<string>;
}

function addNumber(sources: Sources, value: number): void {
  sources.numbers.add(String(value));
  for (let digits = 0; digits <= 4; digits += 1) {
    sources.numbers.add(value.toFixed(digits));
  }
  // formatPercent / formatDelta / formatKilowatts derivations
  if (value > -10 && value < 10) {
    for (let digits = 0; digits <= 2; digits += 1) {
      sources.numbers.add((value * 100).toFixed(digits));
    }
  }
  sources.numbers.add((value / 1000).toFixed(1));
  if (value >= 0) {
    sources.numbers.add(`+${value.toFixed(4)}`);
  } else {
    sources.numbers.add(value.toFixed(4));
  }
}

function addCount(sources: Sources, length: number): void {
  sources.numbers.add(String(length));
}

/** Per-key array-size totals within one payload, so a renderer may show
 * "total modes discarded across devices" (the sum of every `discarded`
 * array) and still trace to traffic. */
type KeyTotals = Map<string, number>;

function walk(
  sources: Sources,
  value: unknown,
  totals: KeyTotals,
  key?: string,
): void {
  if (typeof value === "number") {
    addNumber(sources, value);
  } else if (typeof value === "string") {
    sources.strings.add(value);
  } else if (Array.isArray(value)) {
    addCount(sources, value.length);
    if (key !== undefined) {
      totals.set(key, (totals.get(key) ?? 0) + value.length);
    }
    for (const item of value) walk(sources, item, totals);
  } else if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>);
    addCount(sources, entries.length);
    for (const [childKey, item] of entries) {
      sources.strings.add(childKey);
      walk(sources, item, totals, childKey);
    }
  }
}

function walkPayload(sources: Sources, value: unknown): void {
  const totals: KeyTotals = new Map();
  walk(sources, value, totals);
  for (const total of totals.values()) addCount(sources, total);
}

export function collectSources(traffic: TrafficLog): Sources {
  const sources: Sources = { strings: new Set(), numbers: new Set() };
  for (const exchange of traffic.exchanges) {
    walkPayload(sources, exchange.requestBody);
    walkPayload(sources, exchange.responseBody);
    if (exchange.responseBody === null && exchange.responseText) {
      // NDJSON bodies parse line by line.
      for (const line of exchange.responseText.split("\n")) {
        const trimmed = line.trim();
        if (!trimmed) continue;
        try {
          walkPayload(sources, JSON.parse(trimmed));
        } catch {
          sources.strings.add(trimmed);
        }
      }
    }
  }
  return sources;
}

const DIGIT = /\d/;

function tokenSourced(token: string, sources: Sources): boolean {
  if (!DIGIT.test(token)) return true;
  if (sources.strings.has(token)) return true;
  // Strip the unit/punctuation dressing the formatters add.
  const stripped = token.replace(/[%,()]/g, "");
  if (!DIGIT.test(stripped)) return true;
  if (sources.strings.has(stripped)) return true;
  if (sources.numbers.has(stripped)) return true;
  const unsigned = stripped.replace(/^\+/, "");
  return sources.numbers.has(unsigned) || sources.strings.has(unsigned);
}

export function auditText(text: string, sources: Sources): string[] {
  const trimmed = text.trim();
  if (!trimmed || !DIGIT.test(trimmed)) return [];
  if (sources.strings.has(trimmed)) return [];
  const violations: string[] = [];
  for (const token of trimmed.split(/\s+/)) {
    if (!tokenSourced(token, sources)) {
      violations.push(token);
    }
  }
  return violations;
}

/** Returns every digit-bearing token in the subtree with no recorded source. */
export function auditDom(root: Node, sources: Sources): string[] {
  const violations: string[] = [];
  const visit = (node: Node): void => {
    if (node.nodeType === 3) {
      violations.push(...auditText(node.textContent ?? "", sources));
      return;
    }
    if (node.nodeType === 1) {
      const tag = (node as Element).tagName.toLowerCase();
      if (tag === "style" || tag === "script") return;
      const placeholder = (node as Element).getAttribute?.("placeholder");
      if (placeholder) violations.push(...auditText(placeholder, sources));
    }
    for (const child of Array.from(node.childNodes)) visit(child);
  };
  visit(root);
  return violations;
}
