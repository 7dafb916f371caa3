/**
 * Extension-host harness: downloads a VS Code build and runs the suite in
 * test/suite against the real editor. Needs network access to the VS Code
 * update service; the default `npm test` covers the same flows in-process.
 */

import * as path from "path";
import { runTests } from "@vscode/test-electron";

async function main(): Promise<void> {
  const extensionDevelopmentPath = path.resolve(__dirname, "..", "..");
  const extensionTestsPath = path.resolve(__dirname, "suite", "index");
  const workspacePath = path.resolve(extensionDevelopmentPath, "..", "corpus");
  try {
    await runTests({
      extensionDevelopmentPath,
      extensionTestsPath,
      launchArgs: [workspacePath, "--disable-extensions"],
    });
  } catch (error) {
    console.error("extension-host tests failed", error);
    process.exit(1);
  }
}

void main();
