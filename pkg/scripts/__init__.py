# Scripts package