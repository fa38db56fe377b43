/**
 * A small LSTM text classifier with per-timestep readout.
 *
 * The network maps a token-id sequence to one logit row per prefix
 * (embedding -> LSTM with full sequence output -> shared dense head), so a
 * single forward pass yields the classifier's distribution after every
 * prefix. Training minimizes cross-entropy of the final step only;
 * batches are grouped by sentence length, which keeps padding out of the
 * picture entirely.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import * as tf from "@tensorflow/tfjs";

import { Vocab, vocabFromWords } from "./vocab.js";

export interface ModelConfig {
  vocabSize: number;
  embDim: number;
  units: number;
  classes: number;
  seed: number;
}

export interface Classifier {
  net: tf.LayersModel;
  config: ModelConfig;
  vocab: Vocab;
}

export function buildNet(cfg: ModelConfig): tf.LayersModel {
  const input = tf.input({ shape: [null], dtype: "int32" });
  const embedded = tf.layers
    .embedding({
      inputDim: cfg.vocabSize,
      outputDim: cfg.embDim,
      embeddingsInitializer: tf.initializers.randomUniform({
        minval: -0.1, maxval: 0.1, seed: cfg.seed,
      }),
    })
    .apply(input);
  const sequence = tf.layers
    .lstm({
      units: cfg.units,
      returnSequences: true,
      kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 1 }),
      recurrentInitializer: tf.initializers.orthogonal({ seed: cfg.seed + 2 }),
    })
    .apply(embedded);
  const logits = tf.layers
    .timeDistributed({
      layer: tf.layers.dense({
        units: cfg.classes,
        kernelInitializer: tf.initializers.glorotUniform({ seed: cfg.seed + 3 }),
      }),
    })
    .apply(sequence) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: logits });
}

interface Bucket {
  length: number;
  tokens: number[][];
  labels: number[];
}

export function bucketByLength(encoded: number[][], labels: number[]): Bucket[] {
  const buckets = new Map<number, Bucket>();
  encoded.forEach((seq, i) => {
    let b = buckets.get(seq.length);
    if (!b) {
      b = { length: seq.length, tokens: [], labels: [] };
      buckets.set(seq.length, b);
    }
    b.tokens.push(seq);
    b.labels.push(labels[i]);
  });
  return [...buckets.values()].sort((a, b) => a.length - b.length);
}

/** Deterministic PRNG for shuffling (mulberry32). */
export function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  onEpoch?: (epoch: number, loss: number, accuracy: number) => void;
}

export function trainNet(
  net: tf.LayersModel,
  cfg: ModelConfig,
  encoded: number[][],
  labels: number[],
  opts: TrainOptions,
): void {
  const optimizer = tf.train.adam(opts.learningRate);
  const random = rng(opts.seed);
  const buckets = bucketByLength(encoded, labels);

  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    let lossSum = 0;
    let batches = 0;
    for (const bucket of buckets) {
      const order = bucket.tokens.map((_, i) => i);
      for (let i = order.length - 1; i > 0; i--) {
        const j = Math.floor(random() * (i + 1));
        [order[i], order[j]] = [order[j], order[i]];
      }
      for (let lo = 0; lo < order.length; lo += opts.batchSize) {
        const idx = order.slice(lo, lo + opts.batchSize);
        const xs = tf.tensor2d(
          idx.map((i) => bucket.tokens[i]), [idx.length, bucket.length], "int32",
        );
        const ys = tf.oneHot(tf.tensor1d(idx.map((i) => bucket.labels[i]), "int32"),
                             cfg.classes);
        const loss = optimizer.minimize(() => {
          const out = net.apply(xs) as tf.Tensor3D;
          const last = out
            .slice([0, bucket.length - 1, 0], [idx.length, 1, cfg.classes])
            .squeeze([1]);
          return tf.losses.softmaxCrossEntropy(ys, last) as tf.Scalar;
        }, true)!;
        lossSum += loss.dataSync()[0];
        batches += 1;
        tf.dispose([xs, ys, loss]);
      }
    }
    if (opts.onEpoch) {
      const acc = accuracy(net, cfg, encoded, labels);
      opts.onEpoch(epoch, lossSum / Math.max(batches, 1), acc);
    }
  }
  optimizer.dispose();
}

/** Per-prefix probability rows for one batch of equal-length sentences. */
export function prefixProbs(
  net: tf.LayersModel, batch: number[][],
): number[][][] {
  if (batch.length === 0) return [];
  const length = batch[0].length;
  return tf.tidy(() => {
    const xs = tf.tensor2d(batch, [batch.length, length], "int32");
    const probs = tf.softmax(net.apply(xs) as tf.Tensor3D, -1);
    const data = probs.arraySync() as number[][][];
    return data;
  });
}

export function accuracy(
  net: tf.LayersModel, cfg: ModelConfig, encoded: number[][], labels: number[],
): number {
  let hits = 0;
  const buckets = bucketByLength(encoded, labels);
  for (const bucket of buckets) {
    const probs = prefixProbs(net, bucket.tokens);
    probs.forEach((rows, i) => {
      const final = rows[rows.length - 1];
      const pred = final.indexOf(Math.max(...final));
      if (pred === bucket.labels[i]) hits += 1;
    });
  }
  return hits / encoded.length;
}

interface SavedWeight {
  shape: number[];
  data: string; // base64 float32, row-major
}

export function saveClassifier(dir: string, clf: Classifier): void {
  fs.mkdirSync(dir, { recursive: true });
  const weights: SavedWeight[] = clf.net.getWeights().map((w) => {
    const arr = w.dataSync() as Float32Array;
    return {
      shape: w.shape.slice(),
      data: Buffer.from(arr.buffer, arr.byteOffset, arr.byteLength).toString("base64"),
    };
  });
  const doc = { config: clf.config, words: clf.vocab.words, weights };
  fs.writeFileSync(path.join(dir, "classifier.json"), JSON.stringify(doc));
}

export function loadClassifier(dir: string): Classifier {
  const doc = JSON.parse(
    fs.readFileSync(path.join(dir, "classifier.json"), "utf-8"),
  ) as { config: ModelConfig; words: string[]; weights: SavedWeight[] };
  const net = buildNet(doc.config);
  const tensors = doc.weights.map((w) => {
    const buf = Buffer.from(w.data, "base64");
    const arr = new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4);
    return tf.tensor(Array.from(arr), w.shape);
  });
  net.setWeights(tensors);
  tensors.forEach((t) => t.dispose());
  return { net, config: doc.config, vocab: vocabFromWords(doc.words) };
}
