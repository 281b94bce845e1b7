import { spawnSync } from "node:child_process";
import { resolve } from "node:path";

/** An alignment record as emitted by the core: input fields plus results. */
export interface AlignRecord {
  word: string;
  constituents: string[];
  lang: string;
  boundaries: number[];
  segments: string[];
  cost: number;
}

export interface AlignInput {
  word: string;
  constituents: string[];
  lang?: string;
}

/** One encoded line: pieces and per-word boundary offsets into the raw text. */
export interface EncodeRecord {
  pieces: string[];
  word_boundaries: number[][];
}

export interface HardRecord {
  word: string;
  lang: string;
  hard: boolean;
}

export interface HardInput {
  word: string;
  /** Gold segmentation as offsets into the word, starting 0, ending len. */
  boundaries: number[];
  lang?: string;
}

/** Raised when the core rejects an input or cannot be located. */
export class DecompoundError extends Error {}

const DEFAULT_LANG = "und";
const MAX_BUFFER = 1 << 26;

let cachedCommand: string[] | null = null;

function candidates(): string[][] {
  const override = process.env.DECOMPOUND_CLI;
  if (override !== undefined) {
    const parts = override.split(" ").filter((p) => p.length > 0);
    if (parts.length === 0) {
      throw new DecompoundError("DECOMPOUND_CLI is set but empty");
    }
    return [parts];
  }
  return [["decompound"], ["python3", "-m", "decompound"]];
}

function resolveCommand(): string[] {
  if (cachedCommand !== null) {
    return cachedCommand;
  }
  for (const candidate of candidates()) {
    const probe = spawnSync(candidate[0], [...candidate.slice(1), "--version"], {
      encoding: "utf8",
    });
    if (probe.error === undefined && probe.status === 0) {
      cachedCommand = candidate;
      return candidate;
    }
  }
  throw new DecompoundError(
    "decompound CLI not found; install the core package or point " +
      "DECOMPOUND_CLI at it"
  );
}

function coreError(stderr: string, status: number | null): DecompoundError {
  // the core logs exactly one "ERROR decompound*: message" line on failure
  const lines = stderr.trim().split("\n");
  for (let i = lines.length - 1; i >= 0; i--) {
    const match = lines[i].match(/^ERROR \S+: (.*)$/);
    if (match !== null) {
      return new DecompoundError(match[1]);
    }
  }
  const tail = lines[lines.length - 1] ?? "";
  return new DecompoundError(`core exited with status ${status}: ${tail}`);
}

function runCore(args: string[], input: string): string[] {
  const command = resolveCommand();
  const proc = spawnSync(command[0], [...command.slice(1), ...args], {
    input,
    encoding: "utf8",
    maxBuffer: MAX_BUFFER,
  });
  if (proc.error !== undefined) {
    throw new DecompoundError(`failed to run core: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw coreError(proc.stderr, proc.status);
  }
  return proc.stdout.length === 0 ? [] : proc.stdout.replace(/\n$/, "").split("\n");
}

function toLines(records: unknown[]): string {
  return records.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

/** Version string of the underlying core. */
export function version(): string {
  const out = runCore(["--version"], "");
  return (out[0] ?? "").replace(/^\S+ /, "");
}

/**
 * Align normalized constituents onto a compound's surface form.
 *
 * Returns the boundaries, surface segments, and total edit cost of the
 * cheapest split, with the core's own tie-breaking.
 */
export function align(
  word: string,
  constituents: string[],
  lang: string = DEFAULT_LANG
): AlignRecord {
  return alignBatch([{ word, constituents, lang }])[0];
}

export function alignBatch(entries: AlignInput[]): AlignRecord[] {
  if (entries.length === 0) {
    return [];
  }
  const input = toLines(
    entries.map((e) => ({
      word: e.word,
      constituents: e.constituents,
      lang: e.lang ?? DEFAULT_LANG,
    }))
  );
  return runCore(["align"], input).map((line) => JSON.parse(line) as AlignRecord);
}

/** Encode one line of text with a tokenizer model file. */
export function encode(modelPath: string, text: string): EncodeRecord {
  return encodeBatch(modelPath, [text])[0];
}

export function encodeBatch(modelPath: string, texts: string[]): EncodeRecord[] {
  if (texts.length === 0) {
    return [];
  }
  for (const text of texts) {
    if (text.includes("\n")) {
      throw new DecompoundError("encode input must be a single line");
    }
  }
  const input = texts.join("\n") + "\n";
  const out = runCore(["encode", "--model", resolve(modelPath)], input);
  return out.map((line) => JSON.parse(line) as EncodeRecord);
}

/**
 * Whether the model fails to place a token edge on every gold boundary.
 *
 * The boundaries are offsets into the word and must cover it end to end,
 * with at least one interior cut.
 */
export function isHard(
  modelPath: string,
  word: string,
  boundaries: number[],
  lang: string = DEFAULT_LANG
): boolean {
  return isHardBatch(modelPath, [{ word, boundaries, lang }])[0].hard;
}

export function isHardBatch(
  modelPath: string,
  cases: HardInput[]
): HardRecord[] {
  if (cases.length === 0) {
    return [];
  }
  const input = toLines(
    cases.map((c) => ({
      word: c.word,
      lang: c.lang ?? DEFAULT_LANG,
      boundaries: c.boundaries,
    }))
  );
  const out = runCore(
    ["hardness", "--model", resolve(modelPath), "--gold", "-", "--per-word", "-"],
    input
  );
  return out.map((line) => JSON.parse(line) as HardRecord);
}

/**
 * A tokenizer model handle: the model file is validated once at load and
 * the resolved path never changes afterwards. Alignment does not depend on
 * the model; the entry points here are plain passthroughs for convenience.
 */
export class ModelSession {
  readonly modelPath: string;

  constructor(modelPath: string) {
    this.modelPath = resolve(modelPath);
    // surfaces unreadable or malformed model files at load time
    runCore(["encode", "--model", this.modelPath], "");
  }

  encode(text: string): EncodeRecord {
    return encode(this.modelPath, text);
  }

  encodeBatch(texts: string[]): EncodeRecord[] {
    return encodeBatch(this.modelPath, texts);
  }

  isHard(word: string, boundaries: number[], lang: string = DEFAULT_LANG): boolean {
    return isHard(this.modelPath, word, boundaries, lang);
  }

  isHardBatch(cases: HardInput[]): HardRecord[] {
    return isHardBatch(this.modelPath, cases);
  }

  align(word: string, constituents: string[], lang: string = DEFAULT_LANG): AlignRecord {
    return align(word, constituents, lang);
  }

  alignBatch(entries: AlignInput[]): AlignRecord[] {
    return alignBatch(entries);
  }
}
