/** risra-plot --figure fig6 --in results.csv --out fig6.svg [--format svg|png] */

import { readFileSync, writeFileSync } from "fs";
import { parseCsv, SchemaError } from "./csv.js";
import { figureSpec, FIGURES } from "./figures.js";
import { renderFigure } from "./render.js";

interface Args {
  figure?: string;
  in?: string;
  out?: string;
  format: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { format: "svg" };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const need = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`missing value for ${flag}`);
      return v;
    };
    switch (flag) {
      case "--figure": args.figure = need(); break;
      case "--in": args.in = need(); break;
      case "--out": args.out = need(); break;
      case "--format": args.format = need(); break;
      case "--help":
      case "-h":
        console.log(`usage: risra-plot --figure <${Object.keys(FIGURES).join("|")}>` +
          " --in results.csv --out figure.svg [--format svg|png]");
        process.exit(0);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return args;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
    if (!args.figure || !args.in) {
      throw new Error("--figure and --in are required (see --help)");
    }
  } catch (err) {
    console.error(`argument error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const spec = figureSpec(args.figure);
    const rows = parseCsv(readFileSync(args.in, "utf-8"));
    const svg = renderFigure(spec, rows);
    const out = args.out ?? `${spec.id}.${args.format}`;
    if (args.format === "svg") {
      writeFileSync(out, svg);
    } else if (args.format === "png") {
      // soft dependency: rasterization is optional and not needed for the
      // default vector output
      let sharp: (input: Buffer) => { png(): { toFile(p: string): Promise<unknown> } };
      try {
        sharp = (await import("sharp" as string)).default;
      } catch {
        console.error(
          "png output needs the optional 'sharp' package (npm install sharp); " +
          "the default --format svg has no dependencies");
        return 2;
      }
      await sharp(Buffer.from(svg)).png().toFile(out);
    } else {
      console.error(`unknown format ${args.format}; use svg or png`);
      return 2;
    }
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
