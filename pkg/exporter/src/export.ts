/**
 * Trace export and label serving: the file bridge to the extraction toolkit.
 *
 * Export runs the classifier over every sentence and records the softmax
 * distribution after each prefix; serving writes only the final argmax, one
 * label per input line. Inference is deterministic (fixed weights, no
 * dropout), so repeated runs emit identical files.
 */

import * as tf from "@tensorflow/tfjs";

import { Classifier, bucketByLength, prefixProbs } from "./model.js";
import {
  SentenceRecord,
  TraceRecord,
  readSentences,
  writeLabels,
  writeTraces,
} from "./files.js";
import { encode } from "./vocab.js";

export interface ExportJob {
  classifier: Classifier;
  sentencesPath: string;
  outPath: string;
  batchSize: number;
  backend?: string; // tfjs backend name, e.g. "cpu"; default: current backend
}

export function selectBackend(backend?: string): void {
  if (backend && tf.getBackend() !== backend) {
    if (!tf.setBackend(backend)) {
      throw new Error(`backend ${backend} is not available`);
    }
  }
}

/** Distributions after every prefix, in input order. */
export function tracesFor(
  clf: Classifier, sentences: SentenceRecord[], batchSize = 64,
): TraceRecord[] {
  const encoded = sentences.map((s) => encode(clf.vocab, s.tokens));
  const order = sentences.map((_, i) => i);
  const buckets = bucketByLength(encoded, order);
  const outputs: number[][][] = new Array(sentences.length);
  for (const bucket of buckets) {
    for (let lo = 0; lo < bucket.tokens.length; lo += batchSize) {
      const chunk = bucket.tokens.slice(lo, lo + batchSize);
      const ids = bucket.labels.slice(lo, lo + batchSize); // original indices
      const probs = prefixProbs(clf.net, chunk);
      probs.forEach((rows, i) => {
        outputs[ids[i]] = rows;
      });
    }
  }
  return sentences.map((s, i) => {
    const rec: TraceRecord = { tokens: s.tokens, outputs: outputs[i] };
    if (s.label !== undefined) rec.label = s.label;
    return rec;
  });
}

export function exportTraces(job: ExportJob): number {
  selectBackend(job.backend);
  const sentences = readSentences(job.sentencesPath);
  const records = tracesFor(job.classifier, sentences, job.batchSize);
  writeTraces(job.outPath, records);
  return records.length;
}

/** Final-step argmax per sentence, aligned with the input file. */
export function serveQueries(
  clf: Classifier, sentencesPath: string, outPath: string, batchSize = 64,
): number {
  const sentences = readSentences(sentencesPath);
  const records = tracesFor(clf, sentences, batchSize);
  const labels = records.map((r) => {
    const final = r.outputs[r.outputs.length - 1];
    return final.indexOf(Math.max(...final));
  });
  writeLabels(outPath, labels);
  return labels.length;
}
