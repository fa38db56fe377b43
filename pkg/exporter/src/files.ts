/**
 * Line-delimited file formats shared with the extraction toolkit.
 *
 * Sentence file: {"tokens": [str...], "label": int?} per line.
 * Trace file:    {"tokens": [...], "outputs": [[float...]...], "label": int?}
 *                with one output row (a distribution) per token.
 * Label file:    one integer per line, aligned with its input file.
 */

import * as fs from "node:fs";

export interface SentenceRecord {
  tokens: string[];
  label?: number;
}

export interface TraceRecord extends SentenceRecord {
  outputs: number[][];
}

export function readSentences(path: string): SentenceRecord[] {
  const out: SentenceRecord[] = [];
  const text = fs.readFileSync(path, "utf-8");
  let lineNo = 0;
  for (const line of text.split("\n")) {
    lineNo += 1;
    if (!line.trim()) continue;
    let rec: unknown;
    try {
      rec = JSON.parse(line);
    } catch {
      throw new Error(`line ${lineNo}: invalid JSON`);
    }
    const obj = rec as Record<string, unknown>;
    if (!Array.isArray(obj.tokens) || obj.tokens.length === 0) {
      throw new Error(`line ${lineNo}: record needs non-empty tokens`);
    }
    const sentence: SentenceRecord = { tokens: obj.tokens.map(String) };
    if (typeof obj.label === "number") sentence.label = obj.label;
    out.push(sentence);
  }
  return out;
}

export function writeSentences(path: string, records: SentenceRecord[]): void {
  const lines = records.map((r) => {
    const rec: Record<string, unknown> = { tokens: r.tokens };
    if (r.label !== undefined) rec.label = r.label;
    return JSON.stringify(rec);
  });
  fs.writeFileSync(path, lines.length ? lines.join("\n") + "\n" : "");
}

export function writeTraces(path: string, records: TraceRecord[]): void {
  const lines = records.map((r) => {
    const rec: Record<string, unknown> = { tokens: r.tokens, outputs: r.outputs };
    if (r.label !== undefined) rec.label = r.label;
    return JSON.stringify(rec);
  });
  fs.writeFileSync(path, lines.length ? lines.join("\n") + "\n" : "");
}

export function writeLabels(path: string, labels: number[]): void {
  fs.writeFileSync(path, labels.length ? labels.join("\n") + "\n" : "");
}

export function readLabels(path: string): number[] {
  return fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim() !== "")
    .map((l) => parseInt(l, 10));
}

/** Assert every record satisfies the trace invariants; returns record count. */
export function validateTraceFile(path: string, tol = 1e-6): number {
  const text = fs.readFileSync(path, "utf-8");
  let count = 0;
  let lineNo = 0;
  for (const line of text.split("\n")) {
    lineNo += 1;
    if (!line.trim()) continue;
    const rec = JSON.parse(line) as TraceRecord;
    if (rec.outputs.length !== rec.tokens.length) {
      throw new Error(`line ${lineNo}: ${rec.outputs.length} rows for ${rec.tokens.length} tokens`);
    }
    for (const row of rec.outputs) {
      let sum = 0;
      for (const p of row) {
        if (p < 0) throw new Error(`line ${lineNo}: negative probability`);
        sum += p;
      }
      if (Math.abs(sum - 1) > tol) {
        throw new Error(`line ${lineNo}: row sums to ${sum}`);
      }
    }
    count += 1;
  }
  return count;
}
