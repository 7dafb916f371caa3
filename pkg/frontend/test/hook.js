// Route require("vscode") to the in-process mock for the mocha suite.
"use strict";

const Module = require("module");
const path = require("path");

const originalLoad = Module._load;
Module._load = function (request, parent, isMain) {
  if (request === "vscode") {
    return require(path.join(__dirname, "mock", "vscode.js"));
  }
  return originalLoad(request, parent, isMain);
};
