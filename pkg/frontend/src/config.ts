import * as fs from "fs";
import * as path from "path";
import * as vscode from "vscode";

export interface ClientConfig {
  serverPath: string;
  serverArgs: string[];
  configPath: string;
  trace: string;
}

export function resolveConfig(): ClientConfig {
  const section = vscode.workspace.getConfiguration("a11yForge");
  return {
    serverPath: section.get<string>("serverPath", "a11y-forge-lsp"),
    serverArgs: section.get<string[]>("serverArgs", []),
    configPath: section.get<string>("configPath", ""),
    trace: section.get<string>("trace", "off"),
  };
}

/** Resolve the server executable; null when it cannot be found. */
export function findServer(serverPath: string): string | null {
  if (serverPath.includes(path.sep) || serverPath.includes("/")) {
    return fs.existsSync(serverPath) ? serverPath : null;
  }
  const dirs = (process.env.PATH ?? "").split(path.delimiter);
  for (const dir of dirs) {
    const candidate = path.join(dir, serverPath);
    if (fs.existsSync(candidate)) {
      return candidate;
    }
  }
  return null;
}
