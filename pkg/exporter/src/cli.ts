/**
 * Exporter command line: gen-data, train, export, serve.
 *
 * Typical flow: generate (or bring) a sentence corpus, train the LSTM,
 * export per-prefix traces for the extraction toolkit, and later serve
 * label queries for attack scoring. All stages are seeded.
 */

import * as tf from "@tensorflow/tfjs";

import { DATASET_DEFAULTS, generateDataset } from "./dataset.js";
import { exportTraces, serveQueries } from "./export.js";
import { readSentences } from "./files.js";
import {
  buildNet,
  loadClassifier,
  saveClassifier,
  trainNet,
  accuracy,
} from "./model.js";
import { buildVocab, encode } from "./vocab.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad flag pair near ${argv[i]}`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (v === undefined) throw new Error(`missing --${name}`);
  return v;
}

function num(flags: Map<string, string>, name: string, dflt: number): number {
  const v = flags.get(name);
  return v === undefined ? dflt : Number(v);
}

async function main(): Promise<number> {
  await tf.ready();
  const [command, ...rest] = process.argv.slice(2);
  const flags = parseFlags(rest);

  switch (command) {
    case "gen-data": {
      generateDataset(need(flags, "out-dir"), {
        ...DATASET_DEFAULTS,
        trainCount: num(flags, "train", DATASET_DEFAULTS.trainCount),
        testCount: num(flags, "test", DATASET_DEFAULTS.testCount),
        seed: num(flags, "seed", DATASET_DEFAULTS.seed),
      });
      console.log(`wrote dataset to ${need(flags, "out-dir")}`);
      return 0;
    }
    case "train": {
      const sentences = readSentences(need(flags, "sentences"));
      const labels = sentences.map((s) => {
        if (s.label === undefined) throw new Error("training needs labels");
        return s.label;
      });
      const vocab = buildVocab(sentences);
      const config = {
        vocabSize: vocab.words.length,
        embDim: num(flags, "emb-dim", 16),
        units: num(flags, "units", 24),
        classes: Math.max(...labels) + 1,
        seed: num(flags, "seed", 1),
      };
      const net = buildNet(config);
      const encoded = sentences.map((s) => encode(vocab, s.tokens));
      trainNet(net, config, encoded, labels, {
        epochs: num(flags, "epochs", 20),
        batchSize: num(flags, "batch", 16),
        learningRate: num(flags, "lr", 0.01),
        seed: config.seed,
        onEpoch: (e, loss, acc) =>
          console.log(`epoch ${e}: loss ${loss.toFixed(4)} acc ${acc.toFixed(3)}`),
      });
      const clf = { net, config, vocab };
      saveClassifier(need(flags, "model-dir"), clf);
      console.log(
        `saved model (${vocab.words.length} words, ` +
        `train acc ${accuracy(net, config, encoded, labels).toFixed(3)})`,
      );
      return 0;
    }
    case "export": {
      const clf = loadClassifier(need(flags, "model-dir"));
      const n = exportTraces({
        classifier: clf,
        sentencesPath: need(flags, "sentences"),
        outPath: need(flags, "out"),
        batchSize: num(flags, "batch", 64),
        backend: flags.get("backend"),
      });
      console.log(`exported ${n} traces to ${need(flags, "out")}`);
      return 0;
    }
    case "serve": {
      const clf = loadClassifier(need(flags, "model-dir"));
      const n = serveQueries(
        clf, need(flags, "sentences"), need(flags, "out"),
        num(flags, "batch", 64),
      );
      console.log(`labelled ${n} sentences`);
      return 0;
    }
    default:
      console.error(
        "usage: cli.js <gen-data|train|export|serve> [--flag value ...]",
      );
      return 2;
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err.message}`);
    process.exit(1);
  },
);
