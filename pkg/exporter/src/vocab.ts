/** Token vocabulary with a dedicated unknown id; unseen words map to it. */

export const UNK = "<unk>";

export interface Vocab {
  words: string[];
  index: Map<string, number>;
  unkId: number;
}

export function buildVocab(sentences: { tokens: string[] }[]): Vocab {
  const words: string[] = [];
  const index = new Map<string, number>();
  const add = (w: string) => {
    if (!index.has(w)) {
      index.set(w, words.length);
      words.push(w);
    }
  };
  add(UNK);
  for (const s of sentences) for (const t of s.tokens) add(t);
  return { words, index, unkId: index.get(UNK)! };
}

export function vocabFromWords(words: string[]): Vocab {
  const index = new Map<string, number>();
  words.forEach((w, i) => index.set(w, i));
  const unkId = index.get(UNK);
  if (unkId === undefined) throw new Error("vocabulary has no unknown token");
  return { words: [...words], index, unkId };
}

export function encode(vocab: Vocab, tokens: string[]): number[] {
  return tokens.map((t) => vocab.index.get(t) ?? vocab.unkId);
}
