#!/usr/bin/env node
/** figs <panel-kind> --in a.csv[,b.csv] --out figure.svg [--obs a,b,c] */

import { writeFileSync, renameSync } from "node:fs";
import { SchemaError } from "./csv.js";
import { PANEL_KINDS, PanelKind, PanelSpec, renderPanel } from "./panels.js";

function usage(): string {
  return (
    `usage: figs <${PANEL_KINDS.join("|")}> --in <csv[,csv...]> ` +
    `--out <file.svg> [--obs <col,col,col>]\n`
  );
}

export function parseArgs(argv: string[]): PanelSpec {
  if (argv.length === 0) {
    throw new SchemaError(usage());
  }
  const kind = argv[0] as PanelKind;
  if (!PANEL_KINDS.includes(kind)) {
    throw new SchemaError(`unknown panel kind: ${argv[0]}\n${usage()}`);
  }
  let inputs: string[] = [];
  let output = "";
  let observables: string[] | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new SchemaError(`flag ${flag} needs a value`);
    }
    if (flag === "--in") inputs = value.split(",").filter((s) => s);
    else if (flag === "--out") output = value;
    else if (flag === "--obs") observables = value.split(",").filter((s) => s);
    else throw new SchemaError(`unknown flag: ${flag}\n${usage()}`);
  }
  if (inputs.length === 0 || !output) {
    throw new SchemaError(`--in and --out are required\n${usage()}`);
  }
  return { kind, inputs, output, observables };
}

export function main(argv: string[]): number {
  let spec: PanelSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    process.stderr.write(String((err as Error).message) + "\n");
    return 1;
  }
  try {
    const svg = renderPanel(spec);
    const tmp = spec.output + ".tmp";
    writeFileSync(tmp, svg);
    renameSync(tmp, spec.output);
    process.stdout.write(`wrote ${spec.output}\n`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${(err as Error).message}\n`);
      return 1;
    }
    process.stderr.write(`error: ${String(err)}\n`);
    return 2;
  }
}

