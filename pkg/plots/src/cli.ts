import { main } from "./render.js";

process.exit(main(process.argv.slice(2)));
