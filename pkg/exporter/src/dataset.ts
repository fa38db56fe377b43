/**
 * Synthetic topic-classification corpus generator.
 *
 * Three news-style topics; each sentence mixes a few words from its topic
 * list with shared filler words. Also emits a toy embedding table whose
 * geometry matches the topics (same-topic words cluster), so synonym-based
 * augmentation stays label-preserving.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { SentenceRecord, writeSentences } from "./files.js";
import { rng } from "./model.js";

export interface DatasetOptions {
  trainCount: number;
  testCount: number;
  topicWords: number;   // words per topic
  fillerWords: number;
  minLen: number;
  maxLen: number;
  seed: number;
}

export const DATASET_DEFAULTS: DatasetOptions = {
  trainCount: 400,
  testCount: 150,
  topicWords: 40,
  fillerWords: 140,
  minLen: 5,
  maxLen: 10,
  seed: 7,
};

const TOPIC_NAMES = ["sport", "finance", "health"];

export function generateDataset(dir: string, opts: DatasetOptions): void {
  fs.mkdirSync(dir, { recursive: true });
  const random = rng(opts.seed);
  const topics = TOPIC_NAMES.map((name, t) =>
    Array.from({ length: opts.topicWords }, (_, i) => `${name}${i}`),
  );
  const fillers = Array.from({ length: opts.fillerWords }, (_, i) => `word${i}`);

  const sample = (count: number): SentenceRecord[] => {
    const out: SentenceRecord[] = [];
    for (let i = 0; i < count; i++) {
      const label = Math.floor(random() * topics.length);
      const len = opts.minLen + Math.floor(random() * (opts.maxLen - opts.minLen + 1));
      const topical = 2 + Math.floor(random() * 3);
      const tokens: string[] = [];
      for (let j = 0; j < len; j++) {
        if (j < topical) {
          const list = topics[label];
          // topic words are Zipf-ish: low ranks dominate
          const r = Math.floor(list.length * Math.pow(random(), 2));
          tokens.push(list[Math.min(r, list.length - 1)]);
        } else {
          const r = Math.floor(fillers.length * Math.pow(random(), 2));
          tokens.push(fillers[Math.min(r, fillers.length - 1)]);
        }
      }
      // shuffle token positions
      for (let a = tokens.length - 1; a > 0; a--) {
        const b = Math.floor(random() * (a + 1));
        [tokens[a], tokens[b]] = [tokens[b], tokens[a]];
      }
      out.push({ tokens, label });
    }
    return out;
  };

  writeSentences(path.join(dir, "train.sentences.jsonl"), sample(opts.trainCount));
  writeSentences(path.join(dir, "test.sentences.jsonl"), sample(opts.testCount));

  // embeddings: topic clusters far apart, fillers spread on their own ring
  const lines: string[] = [];
  const dim = 8;
  topics.forEach((list, t) => {
    const center = Array.from({ length: dim }, (_, d) =>
      d === t ? 10.0 : 0.0,
    );
    for (const w of list) {
      const vec = center.map((c) => c + (random() - 0.5) * 0.8);
      lines.push(`${w} ${vec.map((v) => v.toFixed(6)).join(" ")}`);
    }
  });
  fillers.forEach((w, i) => {
    const angle = (2 * Math.PI * i) / fillers.length;
    const vec = Array.from({ length: dim }, (_, d) =>
      d === 4 ? 30 + 3 * Math.cos(angle) : d === 5 ? 30 + 3 * Math.sin(angle) : 0,
    ).map((v) => v + (random() - 0.5) * 0.4);
    lines.push(`${w} ${vec.map((v) => v.toFixed(6)).join(" ")}`);
  });
  fs.writeFileSync(path.join(dir, "embeddings.txt"), lines.join("\n") + "\n");
}
