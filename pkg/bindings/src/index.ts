// Thin sampling surface over the dppsampler CLI: parse a search-space
// document once, then draw configuration batches from it.  Every call shells
// out asynchronously, so the event loop is never blocked while a sampler
// runs, and no worker ever calls back into JS.
//
// The executable is resolved from DPPSAMPLER_CLI (which may include leading
// interpreter words, e.g. "python3 -m dppsampler"), defaulting to the
// installed `dppsampler` script.

import { execFile } from "node:child_process";
import { createHash } from "node:crypto";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

export const version = "0.1.0";

export type ConfigValue = number | string | boolean;
export type Configuration = Record<string, ConfigValue>;

export interface SampleOptions {
  sigma?: number;
  steps?: number;
  pool?: number;
  rotate?: boolean;
}

function cliCommand(): [string, string[]] {
  const raw = process.env.DPPSAMPLER_CLI ?? "dppsampler";
  const words = raw.split(/\s+/).filter((w) => w.length > 0);
  return [words[0], words.slice(1)];
}

async function invoke(args: string[]): Promise<string> {
  const [cmd, preArgs] = cliCommand();
  try {
    const { stdout } = await execFileAsync(cmd, [...preArgs, ...args], {
      maxBuffer: 1 << 26,
    });
    return stdout;
  } catch (err) {
    const failure = err as { stderr?: string; message?: string };
    const diagnostic = (failure.stderr ?? "").trim();
    throw new Error(diagnostic.length > 0 ? diagnostic : failure.message ?? "sampler failed");
  }
}

export class BoundSpaceHandle {
  /** SHA-256 of the source document this handle was parsed from. */
  readonly sourceHash: string;
  private dir: string | null;
  private path: string | null;

  constructor(dir: string, path: string, sourceHash: string) {
    this.dir = dir;
    this.path = path;
    this.sourceHash = sourceHash;
  }

  /** Path of the staged space document; throws once released. */
  get spacePath(): string {
    if (this.path === null) {
      throw new Error("space handle has been released");
    }
    return this.path;
  }

  /** Drop the staged document.  Further sampling through this handle throws. */
  async release(): Promise<void> {
    const dir = this.dir;
    this.dir = null;
    this.path = null;
    if (dir !== null) {
      await rm(dir, { recursive: true, force: true });
    }
  }
}

/**
 * Parse a space-config document and stage it for sampling.  Malformed
 * documents reject with the core's own diagnostic text.
 */
export async function load_space(text: string): Promise<BoundSpaceHandle> {
  const sourceHash = createHash("sha256").update(text).digest("hex");
  const dir = await mkdtemp(join(tmpdir(), "dppspace-"));
  const path = join(dir, "space.json");
  await writeFile(path, text);
  try {
    // A single uniform draw exercises exactly the parse/validation path:
    // it cannot fail for any document the core accepts.
    await invoke(["sample", "--space", path, "--k", "1", "--method", "uniform"]);
  } catch (err) {
    await rm(dir, { recursive: true, force: true });
    throw err;
  }
  return new BoundSpaceHandle(dir, path, sourceHash);
}

/**
 * Draw k configurations.  Output mirrors the CLI's JSON lines: one mapping
 * of active dimension name to value per configuration, in sample order.
 */
export async function sample(
  handle: BoundSpaceHandle,
  k: number,
  method: string,
  seed: number,
  options: SampleOptions = {},
): Promise<Configuration[]> {
  const args = [
    "sample",
    "--space", handle.spacePath,
    "--k", String(k),
    "--method", method,
    "--seed", String(seed),
  ];
  if (options.sigma !== undefined) {
    args.push("--sigma", String(options.sigma));
  }
  if (options.steps !== undefined) {
    args.push("--steps", String(options.steps));
  }
  if (options.pool !== undefined) {
    args.push("--pool", String(options.pool));
  }
  if (options.rotate !== undefined) {
    args.push("--rotate", options.rotate ? "true" : "false");
  }
  const stdout = await invoke(args);
  const lines = stdout.split("\n").filter((line) => line.length > 0);
  // First line is the provenance header; the rest are configurations.
  return lines.slice(1).map((line) => JSON.parse(line) as Configuration);
}
